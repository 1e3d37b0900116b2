#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dosml/classifiers.hpp"
#include "dosml/dataset.hpp"
#include "dosml/pca.hpp"

namespace dosml {

struct ClassMetrics {
  std::string name;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
  std::size_t predicted = 0;
  // Set when the metric was forced to 0 by a zero denominator.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::size_t>> confusion;  // rows = truth, cols = prediction
  std::vector<ClassMetrics> per_class;
  std::size_t n = 0;
  double accuracy = 0;
  double weighted_precision = 0;
  double weighted_recall = 0;
  double weighted_f1 = 0;
  // Benign (label 0) rows predicted as anything else, over all benign rows.
  double fpr_benign = 0;
  bool fpr_defined = false;
  double train_time_s = 0;
  double infer_time_s = 0;

  nlohmann::json to_json() const;
  // One row per class: class,precision,recall,f1,support,flags.
  std::string per_class_csv() const;
  std::string confusion_csv() const;
  std::string to_text() const;
};

EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> pred, int n_classes,
                                std::vector<std::string> class_names = {});
EvalReport evaluate(const TrainedModel& model, const Dataset& test);

// ---------------------------------------------------------------------------

struct SweepConfig {
  std::vector<double> targets{0.50, 0.60, 0.70, 0.80, 0.90, 0.95, 0.99};
  int folds = 5;
  std::uint64_t seed = 0;
  ModelSpec model{};  // defaults to a DT
  int threads = 0;    // folds evaluated concurrently
};

struct SweepRow {
  double target = 0;
  int n_components = 0;  // from a PCA fit on the whole scaled training set
  double fold_components_mean = 0;
  int fold_components_min = 0;
  int fold_components_max = 0;
  double train_time_s = 0;  // summed over folds
  double infer_time_s = 0;
  double accuracy = 0;  // metrics averaged over folds
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double fpr = 0;
  bool fpr_defined = false;
};

std::vector<SweepRow> variance_sweep(const Dataset& train, const SweepConfig& config);

// Percent-scaled metric columns, like the published tables. Timing columns are
// optional because they differ between runs.
std::string sweep_csv(const std::vector<SweepRow>& rows, bool with_timing);
std::string sweep_text(const std::vector<SweepRow>& rows);
nlohmann::json sweep_json(const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------------------

struct CompareConfig {
  double variance_target = 0.80;
  std::vector<ModelSpec> specs;  // one per family row
};

struct CompareRow {
  Family family = Family::dt;
  bool with_pca = false;
  int n_components = 0;  // input width seen by the model
  EvalReport report;
};

struct CompareResult {
  std::vector<CompareRow> with_pca;
  std::vector<CompareRow> without_pca;
  int n_components = 0;
  Scaler scaler;
  PcaModel pca;
};

// Both arms share the scaler fit on train. The PCA arm is fit on scaled train
// and cut at variance_target.
CompareResult compare_models(const Dataset& train, const Dataset& test, const CompareConfig& config);

std::string compare_csv(const std::vector<CompareRow>& rows, bool with_timing);
std::string compare_text(const std::vector<CompareRow>& rows);
nlohmann::json compare_json(const CompareResult& r);

// ---------------------------------------------------------------------------

struct RefitResult {
  TrainedModel model;
  EvalReport report;
  std::vector<std::string> columns;
};

RefitResult refit_on_top_features(const Dataset& train, const Dataset& test, const ImportanceReport& importance,
                                  std::size_t n_top = 6, const ModelSpec& spec = {});

}  // namespace dosml
