#include "dosml/classifiers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "dosml/io.hpp"
#include "parallel.hpp"

namespace dosml {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kArtifactVersion = 1;
constexpr const char* kArtifactFormat = "dosml-model";

void check_input(const Matrix& X, std::span<const int> y, int n_classes) {
  if (X.rows() == 0) throw ModelError("cannot fit on zero rows");
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw DimensionError("row count and label count differ");
  if (n_classes < 1) throw ModelError("need at least one class");
  for (int label : y) {
    if (label < 0 || label >= n_classes) throw DimensionError("label " + std::to_string(label) + " out of range");
  }
  if (!X.allFinite()) throw ModelError("training matrix contains non-finite values");
}

std::vector<int> argmax_rows(const Matrix& S) {
  std::vector<int> out(static_cast<std::size_t>(S.rows()));
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < S.cols(); ++c) {
      if (S(i, c) > S(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

Matrix softmax_rows(const Matrix& S) {
  Matrix P(S.rows(), S.cols());
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    const double m = S.row(i).maxCoeff();
    double total = 0;
    for (Eigen::Index c = 0; c < S.cols(); ++c) {
      P(i, c) = S(i, c) == kNegInf ? 0.0 : std::exp(S(i, c) - m);
      total += P(i, c);
    }
    P.row(i) /= total;
  }
  return P;
}

nlohmann::json matrix_to_json(const Matrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(M.cols()));
    for (Eigen::Index j = 0; j < M.cols(); ++j) r[static_cast<std::size_t>(j)] = M(i, j);
    rows.push_back(r);
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", rows}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto r = j.at("rows").get<Eigen::Index>();
  const auto c = j.at("cols").get<Eigen::Index>();
  Matrix M(r, c);
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != r) throw ModelError("matrix row count mismatch in artifact");
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != c) throw ModelError("matrix column count mismatch in artifact");
    for (Eigen::Index k = 0; k < c; ++k) M(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return M;
}

// JSON has no -inf; absent classes are stored as null.
nlohmann::json log_priors_to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) a.push_back(v[i]);
    else a.push_back(nullptr);
  }
  return a;
}

Vector log_priors_from_json(const nlohmann::json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = a[i].is_null() ? kNegInf : a[i].get<double>();
  }
  return v;
}

struct ClassStats {
  Matrix means;  // d x C
  std::vector<std::size_t> counts;
  Vector log_priors;
};

ClassStats class_stats(const Matrix& X, std::span<const int> y, int n_classes) {
  ClassStats s;
  const auto d = X.cols();
  s.means = Matrix::Zero(d, n_classes);
  s.counts.assign(static_cast<std::size_t>(n_classes), 0);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int k = y[static_cast<std::size_t>(i)];
    s.means.col(k) += X.row(i).transpose();
    ++s.counts[static_cast<std::size_t>(k)];
  }
  s.log_priors = Vector(n_classes);
  const double n = static_cast<double>(X.rows());
  for (int k = 0; k < n_classes; ++k) {
    const auto nk = s.counts[static_cast<std::size_t>(k)];
    if (nk > 0) {
      s.means.col(k) /= static_cast<double>(nk);
      s.log_priors[k] = std::log(static_cast<double>(nk) / n);
    } else {
      s.log_priors[k] = kNegInf;
    }
  }
  return s;
}

void add_ridge(Matrix& cov, double ridge_scale) {
  const double d = static_cast<double>(cov.rows());
  const double tr = cov.trace();
  const double r = tr > 0 ? ridge_scale * tr / d : ridge_scale;
  cov.diagonal().array() += r;
}

}  // namespace

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::dt: return "DT";
    case Family::rf: return "RF";
    case Family::knn: return "KNN";
    case Family::lda: return "LDA";
    case Family::qda: return "QDA";
    case Family::svm_linear: return "SVM_LINEAR";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  std::string s(name);
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "DT") return Family::dt;
  if (s == "RF") return Family::rf;
  if (s == "KNN" || s == "K-NN") return Family::knn;
  if (s == "LDA") return Family::lda;
  if (s == "QDA") return Family::qda;
  if (s == "SVM" || s == "SVM_LINEAR") return Family::svm_linear;
  throw ConfigError("unknown model family '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  auto fail = [this](const std::string& msg) {
    throw ConfigError(std::string(to_string(family)) + ": " + msg);
  };
  switch (family) {
    case Family::rf:
      if (n_trees < 1) fail("n_trees must be >= 1");
      [[fallthrough]];
    case Family::dt:
      if (max_depth < 0) fail("max_depth must be >= 0");
      if (!(min_samples_split >= 2)) fail("min_samples_split must be >= 2");
      if (max_features < 0) fail("max_features must be >= 0");
      break;
    case Family::knn:
      if (k < 1) fail("k must be >= 1");
      break;
    case Family::lda:
    case Family::qda:
      if (!(ridge_scale >= 0) || !std::isfinite(ridge_scale)) fail("ridge_scale must be finite and >= 0");
      break;
    case Family::svm_linear:
      if (svm_epochs < 1) fail("svm_epochs must be >= 1");
      if (!(svm_lambda >= 0) || !std::isfinite(svm_lambda)) fail("svm_lambda must be finite and >= 0");
      break;
  }
  if (threads < 0) fail("threads must be >= 0");
}

// ---------------------------------------------------------------------------
// k-NN

namespace {
constexpr std::size_t kKdLeafSize = 16;
using Candidate = std::pair<double, std::size_t>;  // (squared distance, row)

// One summation order for both search paths, so equal points compare equal.
template <typename A, typename B>
double squared_distance(const A& a, const B& b) {
  double dist = 0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    dist += diff * diff;
  }
  return dist;
}
}  // namespace

KnnClassifier KnnClassifier::fit(const Matrix& X, std::span<const int> y, int n_classes, int k, bool use_kdtree,
                                 int threads) {
  check_input(X, y, n_classes);
  if (k < 1) throw ModelError("k must be >= 1");
  KnnClassifier m;
  m.X_ = X;
  m.y_.assign(y.begin(), y.end());
  m.n_classes_ = n_classes;
  m.k_ = k;
  m.threads_ = threads;
  if (use_kdtree) m.build_kdtree();
  return m;
}

void KnnClassifier::set_use_kdtree(bool on) {
  if (on && kd_.empty()) build_kdtree();
  if (!on) {
    kd_.clear();
    kd_index_.clear();
  }
}

void KnnClassifier::build_kdtree() {
  kd_.clear();
  kd_index_.resize(static_cast<std::size_t>(X_.rows()));
  std::iota(kd_index_.begin(), kd_index_.end(), std::size_t{0});
  const auto d = X_.cols();

  struct Job {
    int node;
    std::size_t begin, end;
  };
  std::vector<Job> stack;
  kd_.push_back({});
  stack.push_back({0, 0, kd_index_.size()});
  while (!stack.empty()) {
    const Job job = stack.back();
    stack.pop_back();
    KdNode node;
    node.begin = job.begin;
    node.end = job.end;
    if (job.end - job.begin > kKdLeafSize) {
      Eigen::Index best_dim = -1;
      double best_spread = 0;
      for (Eigen::Index j = 0; j < d; ++j) {
        double lo = X_(static_cast<Eigen::Index>(kd_index_[job.begin]), j), hi = lo;
        for (std::size_t i = job.begin + 1; i < job.end; ++i) {
          const double v = X_(static_cast<Eigen::Index>(kd_index_[i]), j);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
          best_spread = hi - lo;
          best_dim = j;
        }
      }
      if (best_dim >= 0) {
        const std::size_t mid = job.begin + (job.end - job.begin) / 2;
        auto first = kd_index_.begin() + static_cast<std::ptrdiff_t>(job.begin);
        auto last = kd_index_.begin() + static_cast<std::ptrdiff_t>(job.end);
        auto nth = kd_index_.begin() + static_cast<std::ptrdiff_t>(mid);
        std::nth_element(first, nth, last, [&](std::size_t a, std::size_t b) {
          const double va = X_(static_cast<Eigen::Index>(a), best_dim);
          const double vb = X_(static_cast<Eigen::Index>(b), best_dim);
          return va < vb || (va == vb && a < b);
        });
        node.dim = static_cast<int>(best_dim);
        node.split = X_(static_cast<Eigen::Index>(*nth), best_dim);
        node.left = static_cast<int>(kd_.size());
        kd_.push_back({});
        node.right = static_cast<int>(kd_.size());
        kd_.push_back({});
        stack.push_back({node.left, job.begin, mid});
        stack.push_back({node.right, mid, job.end});
      }
    }
    kd_[static_cast<std::size_t>(job.node)] = node;
  }
}

std::vector<std::size_t> KnnClassifier::neighbours_bruteforce(const Matrix& Q, Eigen::Index row) const {
  const auto n = static_cast<std::size_t>(X_.rows());
  const Eigen::RowVectorXd q = Q.row(row);
  std::vector<Candidate> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    all[i] = {squared_distance(X_.row(static_cast<Eigen::Index>(i)), q), i};
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), n);
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = all[i].second;
  return out;
}

std::vector<std::size_t> KnnClassifier::neighbours(const Matrix& Q, Eigen::Index row) const {
  if (kd_.empty()) return neighbours_bruteforce(Q, row);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), static_cast<std::size_t>(X_.rows()));
  const Eigen::RowVectorXd q = Q.row(row);
  std::priority_queue<Candidate> heap;  // max-heap on (distance, row)
  auto worst = [&] { return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first; };

  // Depth-first; the far side carries its splitting-plane bound.
  struct Visit {
    int node;
    double bound;
  };
  std::vector<Visit> todo{{0, 0.0}};
  while (!todo.empty()) {
    const Visit v = todo.back();
    todo.pop_back();
    if (heap.size() == k && v.bound > worst()) continue;
    const KdNode& n = kd_[static_cast<std::size_t>(v.node)];
    if (n.dim < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t r = kd_index_[i];
        const Candidate c{squared_distance(X_.row(static_cast<Eigen::Index>(r)), q), r};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      continue;
    }
    const double diff = q[n.dim] - n.split;
    const int near = diff <= 0 ? n.left : n.right;
    const int far = diff <= 0 ? n.right : n.left;
    todo.push_back({far, std::max(v.bound, diff * diff)});
    todo.push_back({near, v.bound});
  }
  std::vector<std::size_t> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

int KnnClassifier::vote(const std::vector<std::size_t>& nn) const {
  std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
  for (auto r : nn) ++counts[static_cast<std::size_t>(y_[r])];
  const int top = *std::max_element(counts.begin(), counts.end());
  for (auto r : nn) {
    if (counts[static_cast<std::size_t>(y_[r])] == top) return y_[r];
  }
  return 0;
}

std::vector<int> KnnClassifier::predict(const Matrix& X) const {
  if (X.cols() != X_.cols()) throw DimensionError("k-NN expects " + std::to_string(X_.cols()) + " columns");
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<int> out(n);
  constexpr std::size_t kBlock = 64;
  detail::parallel_for((n + kBlock - 1) / kBlock, threads_, [&](std::size_t b) {
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
      out[i] = vote(neighbours(X, static_cast<Eigen::Index>(i)));
    }
  });
  return out;
}

nlohmann::json KnnClassifier::to_json() const {
  return {{"k", k_}, {"n_classes", n_classes_}, {"kdtree", !kd_.empty()}, {"X", matrix_to_json(X_)}, {"y", y_}};
}

KnnClassifier KnnClassifier::from_json(const nlohmann::json& j) {
  KnnClassifier m;
  m.k_ = j.at("k").get<int>();
  m.n_classes_ = j.at("n_classes").get<int>();
  m.X_ = matrix_from_json(j.at("X"));
  m.y_ = j.at("y").get<std::vector<int>>();
  if (static_cast<Eigen::Index>(m.y_.size()) != m.X_.rows()) throw ModelError("k-NN artifact size mismatch");
  if (j.at("kdtree").get<bool>()) m.build_kdtree();
  return m;
}

// ---------------------------------------------------------------------------
// LDA

Lda Lda::fit(const Matrix& X, std::span<const int> y, int n_classes, double ridge_scale) {
  check_input(X, y, n_classes);
  auto s = class_stats(X, y, n_classes);
  Lda m;
  m.means_ = s.means;
  m.log_priors_ = s.log_priors;
  const auto d = X.cols();
  Matrix cov = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector r = X.row(i).transpose() - s.means.col(y[static_cast<std::size_t>(i)]);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(r);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(X.rows());
  add_ridge(cov, ridge_scale);
  m.cov_ = cov;
  m.prepare();
  return m;
}

void Lda::prepare() {
  Eigen::LLT<Matrix> llt(cov_);
  if (llt.info() != Eigen::Success) throw ModelError("LDA pooled covariance is not positive definite");
  coef_ = llt.solve(means_);
  intercept_ = Vector(means_.cols());
  for (Eigen::Index k = 0; k < means_.cols(); ++k) {
    intercept_[k] = std::isfinite(log_priors_[k]) ? -0.5 * means_.col(k).dot(coef_.col(k)) + log_priors_[k] : kNegInf;
  }
}

Matrix Lda::decision_scores(const Matrix& X) const {
  if (X.cols() != means_.rows()) throw DimensionError("LDA expects " + std::to_string(means_.rows()) + " columns");
  Matrix S = X * coef_;
  for (Eigen::Index k = 0; k < S.cols(); ++k) {
    if (std::isfinite(intercept_[k])) S.col(k).array() += intercept_[k];
    else S.col(k).setConstant(kNegInf);
  }
  return S;
}

Matrix Lda::posteriors(const Matrix& X) const { return softmax_rows(decision_scores(X)); }

std::vector<int> Lda::predict(const Matrix& X) const { return argmax_rows(decision_scores(X)); }

nlohmann::json Lda::to_json() const {
  return {{"means", matrix_to_json(means_)}, {"log_priors", log_priors_to_json(log_priors_)},
          {"covariance", matrix_to_json(cov_)}};
}

Lda Lda::from_json(const nlohmann::json& j) {
  Lda m;
  m.means_ = matrix_from_json(j.at("means"));
  m.log_priors_ = log_priors_from_json(j.at("log_priors"));
  m.cov_ = matrix_from_json(j.at("covariance"));
  if (m.log_priors_.size() != m.means_.cols() || m.cov_.rows() != m.means_.rows()) {
    throw ModelError("LDA artifact size mismatch");
  }
  m.prepare();
  return m;
}

// ---------------------------------------------------------------------------
// QDA

Qda Qda::fit(const Matrix& X, std::span<const int> y, int n_classes, double ridge_scale) {
  check_input(X, y, n_classes);
  auto s = class_stats(X, y, n_classes);
  Qda m;
  m.means_ = s.means;
  m.log_priors_ = s.log_priors;
  const auto d = X.cols();
  m.covs_.assign(static_cast<std::size_t>(n_classes), Matrix::Zero(d, d));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int k = y[static_cast<std::size_t>(i)];
    const Vector r = X.row(i).transpose() - s.means.col(k);
    m.covs_[static_cast<std::size_t>(k)].selfadjointView<Eigen::Lower>().rankUpdate(r);
  }
  for (int k = 0; k < n_classes; ++k) {
    auto& c = m.covs_[static_cast<std::size_t>(k)];
    const auto nk = s.counts[static_cast<std::size_t>(k)];
    if (nk == 0) {
      c = Matrix::Identity(d, d);
      continue;
    }
    c = c.selfadjointView<Eigen::Lower>();
    c /= static_cast<double>(nk);
    add_ridge(c, ridge_scale);
  }
  m.prepare();
  return m;
}

void Qda::prepare() {
  const auto C = means_.cols();
  chol_.clear();
  half_logdet_ = Vector(C);
  for (Eigen::Index k = 0; k < C; ++k) {
    Eigen::LLT<Matrix> llt(covs_[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success) {
      throw ModelError("QDA covariance of class " + std::to_string(k) + " is not positive definite");
    }
    Matrix L = llt.matrixL();
    half_logdet_[k] = L.diagonal().array().log().sum();
    chol_.push_back(std::move(L));
  }
}

Matrix Qda::decision_scores(const Matrix& X) const {
  if (X.cols() != means_.rows()) throw DimensionError("QDA expects " + std::to_string(means_.rows()) + " columns");
  Matrix S(X.rows(), means_.cols());
  for (Eigen::Index k = 0; k < means_.cols(); ++k) {
    if (!std::isfinite(log_priors_[k])) {
      S.col(k).setConstant(kNegInf);
      continue;
    }
    Matrix centred = (X.rowwise() - means_.col(k).transpose()).transpose();
    chol_[static_cast<std::size_t>(k)].triangularView<Eigen::Lower>().solveInPlace(centred);
    S.col(k) = (-0.5 * centred.colwise().squaredNorm().array() - half_logdet_[k] + log_priors_[k]).transpose();
  }
  return S;
}

Matrix Qda::posteriors(const Matrix& X) const { return softmax_rows(decision_scores(X)); }

std::vector<int> Qda::predict(const Matrix& X) const { return argmax_rows(decision_scores(X)); }

nlohmann::json Qda::to_json() const {
  nlohmann::json covs = nlohmann::json::array();
  for (const auto& c : covs_) covs.push_back(matrix_to_json(c));
  return {{"means", matrix_to_json(means_)}, {"log_priors", log_priors_to_json(log_priors_)}, {"covariances", covs}};
}

Qda Qda::from_json(const nlohmann::json& j) {
  Qda m;
  m.means_ = matrix_from_json(j.at("means"));
  m.log_priors_ = log_priors_from_json(j.at("log_priors"));
  for (const auto& c : j.at("covariances")) m.covs_.push_back(matrix_from_json(c));
  if (m.log_priors_.size() != m.means_.cols() || static_cast<Eigen::Index>(m.covs_.size()) != m.means_.cols()) {
    throw ModelError("QDA artifact size mismatch");
  }
  m.prepare();
  return m;
}

// ---------------------------------------------------------------------------
// Linear SVM

namespace {

double svm_objective(const Matrix& Xa, const std::vector<double>& t, const Vector& w, double lambda) {
  const Vector margins = Xa * w;
  double hinge = 0;
  for (Eigen::Index i = 0; i < Xa.rows(); ++i) {
    hinge += std::max(0.0, 1.0 - t[static_cast<std::size_t>(i)] * margins[i]);
  }
  return 0.5 * lambda * w.squaredNorm() + hinge / static_cast<double>(Xa.rows());
}

}  // namespace

LinearSvm LinearSvm::fit(const Matrix& X, std::span<const int> y, int n_classes, int epochs, double lambda,
                         std::uint64_t seed) {
  check_input(X, y, n_classes);
  if (epochs < 1) throw ModelError("svm_epochs must be >= 1");
  const auto n = X.rows();
  const auto d = X.cols();
  LinearSvm m;
  m.lambda_ = lambda > 0 ? lambda : 1.0 / static_cast<double>(n);
  m.weights_ = Matrix::Zero(d + 1, n_classes);
  m.present_.assign(static_cast<std::size_t>(n_classes), false);
  for (int label : y) m.present_[static_cast<std::size_t>(label)] = true;
  m.history_.assign(static_cast<std::size_t>(n_classes), {});

  Matrix Xa(n, d + 1);
  Xa.leftCols(d) = X;
  Xa.col(d).setOnes();
  const double radius = 1.0 / std::sqrt(m.lambda_);

  for (int c = 0; c < n_classes; ++c) {
    if (!m.present_[static_cast<std::size_t>(c)]) continue;
    std::vector<double> target(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) target[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;

    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(c) * 0x9E3779B97F4A7C15ULL);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Vector w = Vector::Zero(d + 1);
    Vector avg = Vector::Zero(d + 1);
    std::uint64_t t = 0;
    for (int e = 0; e < epochs; ++e) {
      std::shuffle(order.begin(), order.end(), rng);
      for (auto i : order) {
        ++t;
        const double eta = 1.0 / (m.lambda_ * static_cast<double>(t));
        const double yi = target[static_cast<std::size_t>(i)];
        const double margin = yi * Xa.row(i).dot(w);
        w *= 1.0 - eta * m.lambda_;
        if (margin < 1.0) w += (eta * yi) * Xa.row(i).transpose();
        const double norm = w.norm();
        if (norm > radius) w *= radius / norm;
        avg += (w - avg) / static_cast<double>(t);
      }
      m.history_[static_cast<std::size_t>(c)].push_back(svm_objective(Xa, target, avg, m.lambda_));
    }
    m.weights_.col(c) = avg;
  }
  return m;
}

Matrix LinearSvm::decision_scores(const Matrix& X) const {
  const auto d = weights_.rows() - 1;
  if (X.cols() != d) throw DimensionError("SVM expects " + std::to_string(d) + " columns");
  Matrix S = X * weights_.topRows(d);
  S.rowwise() += weights_.row(d);
  for (Eigen::Index c = 0; c < S.cols(); ++c) {
    if (!present_[static_cast<std::size_t>(c)]) S.col(c).setConstant(kNegInf);
  }
  return S;
}

std::vector<int> LinearSvm::predict(const Matrix& X) const { return argmax_rows(decision_scores(X)); }

nlohmann::json LinearSvm::to_json() const {
  return {{"lambda", lambda_}, {"weights", matrix_to_json(weights_)}, {"present", present_}};
}

LinearSvm LinearSvm::from_json(const nlohmann::json& j) {
  LinearSvm m;
  m.lambda_ = j.at("lambda").get<double>();
  m.weights_ = matrix_from_json(j.at("weights"));
  m.present_ = j.at("present").get<std::vector<bool>>();
  if (static_cast<Eigen::Index>(m.present_.size()) != m.weights_.cols()) throw ModelError("SVM artifact size mismatch");
  return m;
}

// ---------------------------------------------------------------------------

std::vector<int> TrainedModel::predict(const Matrix& X, double* infer_time_s) const {
  if (!model) throw ModelError("model is empty");
  if (X.cols() != n_features) {
    throw DimensionError("model expects " + std::to_string(n_features) + " columns, got " + std::to_string(X.cols()));
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto out = model->predict(X);
  if (infer_time_s) {
    *infer_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

TrainedModel fit(const ModelSpec& spec, const Matrix& X, std::span<const int> y, int n_classes) {
  spec.validate();
  check_input(X, y, n_classes);
  const auto t0 = std::chrono::steady_clock::now();
  std::shared_ptr<const Model> model;
  switch (spec.family) {
    case Family::dt: {
      TreeParams p{spec.max_depth, spec.min_samples_split, spec.max_features};
      model = std::make_shared<DecisionTree>(DecisionTree::fit(X, y, n_classes, p, {}, spec.seed));
      break;
    }
    case Family::rf:
      model = std::make_shared<RandomForest>(RandomForest::fit(X, y, n_classes, spec));
      break;
    case Family::knn:
      model = std::make_shared<KnnClassifier>(KnnClassifier::fit(X, y, n_classes, spec.k, spec.knn_kdtree, spec.threads));
      break;
    case Family::lda:
      model = std::make_shared<Lda>(Lda::fit(X, y, n_classes, spec.ridge_scale));
      break;
    case Family::qda:
      model = std::make_shared<Qda>(Qda::fit(X, y, n_classes, spec.ridge_scale));
      break;
    case Family::svm_linear:
      model = std::make_shared<LinearSvm>(
          LinearSvm::fit(X, y, n_classes, spec.svm_epochs, spec.svm_lambda, spec.seed));
      break;
  }
  TrainedModel m;
  m.train_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.model = std::move(model);
  m.family = spec.family;
  m.n_classes = n_classes;
  m.n_features = static_cast<int>(X.cols());
  return m;
}

nlohmann::json save_model(const TrainedModel& m) {
  if (!m.model) throw ModelError("model is empty");
  return {{"format", kArtifactFormat},
          {"version", kArtifactVersion},
          {"family", std::string(to_string(m.family))},
          {"n_classes", m.n_classes},
          {"n_features", m.n_features},
          {"train_time_s", m.train_time_s},
          {"params", m.model->to_json()}};
}

TrainedModel load_model(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kArtifactFormat) throw ModelError("not a model artifact");
    if (j.at("version").get<int>() != kArtifactVersion) {
      throw ModelError("unsupported model artifact version " + std::to_string(j.at("version").get<int>()));
    }
    TrainedModel m;
    m.family = parse_family(j.at("family").get<std::string>());
    m.n_classes = j.at("n_classes").get<int>();
    m.n_features = j.at("n_features").get<int>();
    m.train_time_s = j.value("train_time_s", 0.0);
    const auto& p = j.at("params");
    switch (m.family) {
      case Family::dt: m.model = std::make_shared<DecisionTree>(DecisionTree::from_json(p)); break;
      case Family::rf: m.model = std::make_shared<RandomForest>(RandomForest::from_json(p)); break;
      case Family::knn: m.model = std::make_shared<KnnClassifier>(KnnClassifier::from_json(p)); break;
      case Family::lda: m.model = std::make_shared<Lda>(Lda::from_json(p)); break;
      case Family::qda: m.model = std::make_shared<Qda>(Qda::from_json(p)); break;
      case Family::svm_linear: m.model = std::make_shared<LinearSvm>(LinearSvm::from_json(p)); break;
    }
    if (m.model->n_features() != m.n_features || m.model->n_classes() != m.n_classes) {
      throw ModelError("model artifact header disagrees with its parameters");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model artifact: ") + e.what());
  }
}

std::string ImportanceReport::to_csv() const {
  std::ostringstream out;
  out << "feature,importance\n";
  for (const auto& [name, v] : entries) out << name << ',' << format_exact(v) << '\n';
  return out.str();
}

ImportanceReport gini_importance(const TrainedModel& m, const std::vector<std::string>& feature_names) {
  if (!m.model) throw ModelError("model is empty");
  std::vector<double> imp;
  if (m.family == Family::dt) imp = m.as<DecisionTree>().feature_importance();
  else if (m.family == Family::rf) imp = m.as<RandomForest>().feature_importance();
  else throw ModelError("feature importance needs a DT or RF model, got " + std::string(to_string(m.family)));
  if (feature_names.size() != imp.size()) throw DimensionError("feature name count differs from model width");
  std::vector<std::size_t> order(imp.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
  ImportanceReport r;
  for (auto j : order) r.entries.emplace_back(feature_names[j], imp[j]);
  return r;
}

}  // namespace dosml
