#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dosml/dataset.hpp"

namespace dosml {

enum class Family { dt, rf, knn, lda, qda, svm_linear };

std::string_view to_string(Family f) noexcept;
// Accepts DT, RF, KNN (or K-NN), LDA, QDA, SVM (or SVM_LINEAR), any case.
Family parse_family(std::string_view name);

// Hyperparameters for every family; each family reads only its own fields.
struct ModelSpec {
  Family family = Family::dt;
  std::uint64_t seed = 0;

  // trees
  int max_depth = 30;
  double min_samples_split = 2;
  int n_trees = 100;
  bool bootstrap = true;
  int max_features = 0;  // 0: all features for DT, floor(sqrt(d)) for RF

  // k-NN
  int k = 5;
  bool knn_kdtree = true;

  // LDA / QDA: ridge added to the covariance diagonal is ridge_scale * trace / d
  double ridge_scale = 1e-6;

  // linear SVM
  int svm_epochs = 20;
  double svm_lambda = 0;  // 0: 1 / N

  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

class Model {
 public:
  virtual ~Model() = default;
  virtual Family family() const noexcept = 0;
  virtual int n_features() const noexcept = 0;
  virtual int n_classes() const noexcept = 0;
  virtual std::vector<int> predict(const Matrix& X) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

// ---------------------------------------------------------------------------
// CART with Gini impurity.

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  int label = 0;
  double weight = 0;
  double impurity = 0;
};

struct TreeParams {
  int max_depth = 30;
  double min_samples_split = 2;
  int max_features = 0;  // 0 or >= d: every feature at every node
};

class DecisionTree final : public Model {
 public:
  // sample_weight holds non-negative integer multiplicities (bootstrap counts);
  // empty means every row once. The seed only matters when max_features < d.
  static DecisionTree fit(const Matrix& X, std::span<const int> y, int n_classes, const TreeParams& params,
                          std::span<const double> sample_weight = {}, std::uint64_t seed = 0);

  Family family() const noexcept override { return Family::dt; }
  int n_features() const noexcept override { return n_features_; }
  int n_classes() const noexcept override { return n_classes_; }
  std::vector<int> predict(const Matrix& X) const override;
  int predict_row(const Matrix& X, Eigen::Index row) const;
  nlohmann::json to_json() const override;
  static DecisionTree from_json(const nlohmann::json& j);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  int depth() const;
  // Per-feature total weighted impurity decrease, unnormalised.
  std::vector<double> impurity_decrease() const;
  // Normalised to sum 1; all zero for a single-leaf tree.
  std::vector<double> feature_importance() const;

 private:
  std::vector<TreeNode> nodes_;
  int n_features_ = 0;
  int n_classes_ = 0;
};

class RandomForest final : public Model {
 public:
  static RandomForest fit(const Matrix& X, std::span<const int> y, int n_classes, const ModelSpec& spec);

  Family family() const noexcept override { return Family::rf; }
  int n_features() const noexcept override { return n_features_; }
  int n_classes() const noexcept override { return n_classes_; }
  // Majority vote, ties to the lowest label.
  std::vector<int> predict(const Matrix& X) const override;
  nlohmann::json to_json() const override;
  static RandomForest from_json(const nlohmann::json& j);

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  // Mean of per-tree normalised importances.
  std::vector<double> feature_importance() const;

 private:
  std::vector<DecisionTree> trees_;
  int n_features_ = 0;
  int n_classes_ = 0;
  int threads_ = 0;
};

// ---------------------------------------------------------------------------
// k nearest neighbours, Euclidean. Neighbours are ordered by (distance, row
// index); class-vote ties go to the tied class with the nearest member.

class KnnClassifier final : public Model {
 public:
  static KnnClassifier fit(const Matrix& X, std::span<const int> y, int n_classes, int k, bool use_kdtree,
                           int threads = 0);

  Family family() const noexcept override { return Family::knn; }
  int n_features() const noexcept override { return static_cast<int>(X_.cols()); }
  int n_classes() const noexcept override { return n_classes_; }
  std::vector<int> predict(const Matrix& X) const override;
  nlohmann::json to_json() const override;
  static KnnClassifier from_json(const nlohmann::json& j);

  // Row indices of the k nearest reference rows for one query.
  std::vector<std::size_t> neighbours(const Matrix& Q, Eigen::Index row) const;
  std::vector<std::size_t> neighbours_bruteforce(const Matrix& Q, Eigen::Index row) const;
  bool uses_kdtree() const noexcept { return !kd_.empty(); }
  void set_use_kdtree(bool on);

 private:
  struct KdNode {
    int dim = -1;  // -1: leaf
    double split = 0;
    int left = -1, right = -1;
    std::size_t begin = 0, end = 0;  // into kd_index_
  };
  void build_kdtree();
  int vote(const std::vector<std::size_t>& nn) const;

  // Row-major copy so each reference row is contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X_;
  std::vector<int> y_;
  int n_classes_ = 0;
  int k_ = 5;
  int threads_ = 0;
  std::vector<KdNode> kd_;
  std::vector<std::size_t> kd_index_;
};

// ---------------------------------------------------------------------------
// Gaussian discriminants with maximum-likelihood (divide by N) covariances.

class Lda final : public Model {
 public:
  static Lda fit(const Matrix& X, std::span<const int> y, int n_classes, double ridge_scale);

  Family family() const noexcept override { return Family::lda; }
  int n_features() const noexcept override { return static_cast<int>(means_.rows()); }
  int n_classes() const noexcept override { return static_cast<int>(means_.cols()); }
  std::vector<int> predict(const Matrix& X) const override;
  nlohmann::json to_json() const override;
  static Lda from_json(const nlohmann::json& j);

  // delta_k(x) = x' S^-1 mu_k - mu_k' S^-1 mu_k / 2 + ln pi_k; -inf for absent classes.
  Matrix decision_scores(const Matrix& X) const;
  Matrix posteriors(const Matrix& X) const;
  const Matrix& covariance() const noexcept { return cov_; }
  const Matrix& means() const noexcept { return means_; }

 private:
  void prepare();
  Matrix means_;  // d x C
  Vector log_priors_;
  Matrix cov_;    // regularised pooled covariance
  Matrix coef_;   // S^-1 mu_k, d x C
  Vector intercept_;
};

class Qda final : public Model {
 public:
  static Qda fit(const Matrix& X, std::span<const int> y, int n_classes, double ridge_scale);

  Family family() const noexcept override { return Family::qda; }
  int n_features() const noexcept override { return static_cast<int>(means_.rows()); }
  int n_classes() const noexcept override { return static_cast<int>(means_.cols()); }
  std::vector<int> predict(const Matrix& X) const override;
  nlohmann::json to_json() const override;
  static Qda from_json(const nlohmann::json& j);

  // delta_k(x) = -ln|S_k| / 2 - (x - mu_k)' S_k^-1 (x - mu_k) / 2 + ln pi_k.
  Matrix decision_scores(const Matrix& X) const;
  Matrix posteriors(const Matrix& X) const;
  const std::vector<Matrix>& covariances() const noexcept { return covs_; }

 private:
  void prepare();
  Matrix means_;
  Vector log_priors_;
  std::vector<Matrix> covs_;
  std::vector<Matrix> chol_;  // lower Cholesky factors
  Vector half_logdet_;
};

// ---------------------------------------------------------------------------
// One-vs-rest linear SVM trained by Pegasos-style subgradient descent on the
// regularised hinge loss; prediction uses the averaged iterate.

class LinearSvm final : public Model {
 public:
  static LinearSvm fit(const Matrix& X, std::span<const int> y, int n_classes, int epochs, double lambda,
                       std::uint64_t seed);

  Family family() const noexcept override { return Family::svm_linear; }
  int n_features() const noexcept override { return static_cast<int>(weights_.rows()) - 1; }
  int n_classes() const noexcept override { return static_cast<int>(weights_.cols()); }
  std::vector<int> predict(const Matrix& X) const override;
  nlohmann::json to_json() const override;
  static LinearSvm from_json(const nlohmann::json& j);

  Matrix decision_scores(const Matrix& X) const;
  // objective_history()[c][e]: regularised hinge objective of class c's
  // averaged iterate after epoch e.
  const std::vector<std::vector<double>>& objective_history() const noexcept { return history_; }
  const Matrix& weights() const noexcept { return weights_; }  // (d + 1) x C, last row is the bias
  double lambda() const noexcept { return lambda_; }

 private:
  Matrix weights_;
  std::vector<bool> present_;
  std::vector<std::vector<double>> history_;
  double lambda_ = 0;
};

// ---------------------------------------------------------------------------

struct TrainedModel {
  std::shared_ptr<const Model> model;
  Family family = Family::dt;
  int n_classes = 0;
  int n_features = 0;
  double train_time_s = 0;

  // Checks the column count; optionally reports wall-clock inference time.
  std::vector<int> predict(const Matrix& X, double* infer_time_s = nullptr) const;

  template <typename T>
  const T& as() const {
    return dynamic_cast<const T&>(*model);
  }
};

TrainedModel fit(const ModelSpec& spec, const Matrix& X, std::span<const int> y, int n_classes);

nlohmann::json save_model(const TrainedModel& m);
TrainedModel load_model(const nlohmann::json& j);

struct ImportanceReport {
  std::vector<std::pair<std::string, double>> entries;  // sorted by decreasing importance

  std::string to_csv() const;
};

// Gini importance of a DT, or the mean over trees of an RF.
ImportanceReport gini_importance(const TrainedModel& m, const std::vector<std::string>& feature_names);

}  // namespace dosml
