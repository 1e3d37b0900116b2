#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dosml/classifiers.hpp"
#include "parallel.hpp"

namespace dosml {

namespace {

double gini(std::span<const double> counts, double total) {
  if (total <= 0) return 0.0;
  double s = 0;
  for (double c : counts) s += c * c;
  return 1.0 - s / (total * total);
}

int majority(std::span<const double> counts) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(counts.size()); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return best;
}

double midpoint(double lo, double hi) {
  const double m = lo + (hi - lo) / 2;
  return m < hi ? m : lo;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const int> y, int n_classes, const TreeParams& params,
              std::vector<double> weights, std::uint64_t seed)
      : X_(X), y_(y), n_classes_(n_classes), params_(params), w_(std::move(weights)), rng_(seed) {
    d_ = static_cast<int>(X.cols());
    sample_features_ = params.max_features > 0 && params.max_features < d_;
    m_ = sample_features_ ? params.max_features : d_;
  }

  std::vector<TreeNode> run(std::vector<std::size_t> rows) {
    build(rows, 0);
    return std::move(nodes_);
  }

 private:
  struct Best {
    bool found = false;
    int feature = -1;
    double threshold = 0;
    double score = 0;  // sum over children of (sum_k w_ck^2) / W_c; larger is purer
  };

  int build(std::vector<std::size_t>& rows, int depth) {
    std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
    double total = 0;
    for (auto r : rows) {
      counts[static_cast<std::size_t>(y_[r])] += w_[r];
      total += w_[r];
    }
    const int idx = static_cast<int>(nodes_.size());
    TreeNode node;
    node.weight = total;
    node.impurity = gini(counts, total);
    node.label = majority(counts);
    nodes_.push_back(node);

    const auto present = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; });
    if (present <= 1 || depth >= params_.max_depth || total < params_.min_samples_split) return idx;

    const Best best = find_split(rows, counts, total);
    if (!best.found) return idx;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (X_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    nodes_[idx].feature = best.feature;
    nodes_[idx].threshold = best.threshold;
    const int l = build(left, depth + 1);
    nodes_[idx].left = l;
    const int r = build(right, depth + 1);
    nodes_[idx].right = r;
    return idx;
  }

  Best find_split(const std::vector<std::size_t>& rows, const std::vector<double>& counts, double total) {
    Best best;
    const double tol = 1e-12 * total;
    std::vector<int> order(static_cast<std::size_t>(d_));
    std::iota(order.begin(), order.end(), 0);
    int visited = 0;
    for (int i = 0; i < d_; ++i) {
      if (sample_features_) {
        std::uniform_int_distribution<int> pick(i, d_ - 1);
        std::swap(order[i], order[pick(rng_)]);
        // Keep drawing past max_features only while nothing splittable was seen.
        if (visited >= m_ && best.found) break;
      }
      ++visited;
      evaluate_feature(order[i], rows, counts, total, tol, best);
    }
    return best;
  }

  void evaluate_feature(int f, const std::vector<std::size_t>& rows, const std::vector<double>& counts,
                        double total, double tol, Best& best) {
    buf_.clear();
    for (auto r : rows) buf_.emplace_back(X_(static_cast<Eigen::Index>(r), f), r);
    std::sort(buf_.begin(), buf_.end());
    if (buf_.front().first == buf_.back().first) return;

    std::vector<double> left(static_cast<std::size_t>(n_classes_), 0.0);
    std::vector<double> right = counts;
    double wl = 0, sq_l = 0, sq_r = 0;
    for (double c : right) sq_r += c * c;
    for (std::size_t i = 0; i + 1 < buf_.size(); ++i) {
      const auto r = buf_[i].second;
      const auto k = static_cast<std::size_t>(y_[r]);
      const double w = w_[r];
      sq_l += (2 * left[k] + w) * w;
      sq_r -= (2 * right[k] - w) * w;
      left[k] += w;
      right[k] -= w;
      wl += w;
      if (!(buf_[i].first < buf_[i + 1].first)) continue;
      // Recompute the sums of squares exactly at candidate positions; the
      // running updates above only steer the scan.
      double l2 = 0, r2 = 0;
      for (int c = 0; c < n_classes_; ++c) {
        l2 += left[c] * left[c];
        r2 += right[c] * right[c];
      }
      const double wr = total - wl;
      const double score = l2 / wl + r2 / wr;
      const double thr = midpoint(buf_[i].first, buf_[i + 1].first);
      const bool better = !best.found || score > best.score + tol ||
                          (std::fabs(score - best.score) <= tol &&
                           (f < best.feature || (f == best.feature && thr < best.threshold)));
      if (better) {
        best.found = true;
        best.feature = f;
        best.threshold = thr;
        best.score = score;
      }
    }
  }

  const Matrix& X_;
  std::span<const int> y_;
  int n_classes_;
  TreeParams params_;
  std::vector<double> w_;
  std::mt19937_64 rng_;
  int d_ = 0;
  int m_ = 0;
  bool sample_features_ = false;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, std::size_t>> buf_;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_training_input(const Matrix& X, std::span<const int> y, int n_classes) {
  if (X.rows() == 0) throw ModelError("cannot fit on zero rows");
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw DimensionError("row count and label count differ");
  if (n_classes < 1) throw ModelError("need at least one class");
  for (int label : y) {
    if (label < 0 || label >= n_classes) throw DimensionError("label out of range");
  }
}

}  // namespace

DecisionTree DecisionTree::fit(const Matrix& X, std::span<const int> y, int n_classes, const TreeParams& params,
                               std::span<const double> sample_weight, std::uint64_t seed) {
  check_training_input(X, y, n_classes);
  std::vector<double> w;
  if (sample_weight.empty()) {
    w.assign(y.size(), 1.0);
  } else {
    if (sample_weight.size() != y.size()) throw DimensionError("sample weight count differs from rows");
    w.assign(sample_weight.begin(), sample_weight.end());
  }
  std::vector<std::size_t> rows;
  rows.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (w[i] > 0) rows.push_back(i);
  }
  if (rows.empty()) throw ModelError("all sample weights are zero");

  DecisionTree t;
  t.n_features_ = static_cast<int>(X.cols());
  t.n_classes_ = n_classes;
  TreeBuilder builder(X, y, n_classes, params, std::move(w), seed);
  t.nodes_ = builder.run(std::move(rows));
  return t;
}

int DecisionTree::predict_row(const Matrix& X, Eigen::Index row) const {
  int n = 0;
  while (nodes_[n].feature >= 0) {
    n = X(row, nodes_[n].feature) <= nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
  }
  return nodes_[n].label;
}

std::vector<int> DecisionTree::predict(const Matrix& X) const {
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = predict_row(X, i);
  return out;
}

int DecisionTree::depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes_[i].feature >= 0) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

std::vector<double> DecisionTree::impurity_decrease() const {
  std::vector<double> dec(static_cast<std::size_t>(n_features_), 0.0);
  for (const auto& n : nodes_) {
    if (n.feature < 0) continue;
    const auto& l = nodes_[static_cast<std::size_t>(n.left)];
    const auto& r = nodes_[static_cast<std::size_t>(n.right)];
    dec[static_cast<std::size_t>(n.feature)] += n.weight * n.impurity - l.weight * l.impurity - r.weight * r.impurity;
  }
  return dec;
}

std::vector<double> DecisionTree::feature_importance() const {
  auto imp = impurity_decrease();
  for (auto& v : imp) v = std::max(0.0, v);
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0) {
    for (auto& v : imp) v /= total;
  }
  return imp;
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label, n.weight, n.impurity});
  }
  return {{"n_features", n_features_}, {"n_classes", n_classes_}, {"nodes", nodes}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  DecisionTree t;
  t.n_features_ = j.at("n_features").get<int>();
  t.n_classes_ = j.at("n_classes").get<int>();
  for (const auto& a : j.at("nodes")) {
    TreeNode n;
    n.feature = a.at(0).get<int>();
    n.threshold = a.at(1).get<double>();
    n.left = a.at(2).get<int>();
    n.right = a.at(3).get<int>();
    n.label = a.at(4).get<int>();
    n.weight = a.at(5).get<double>();
    n.impurity = a.at(6).get<double>();
    t.nodes_.push_back(n);
  }
  const int count = static_cast<int>(t.nodes_.size());
  if (count == 0) throw ModelError("tree artifact has no nodes");
  for (const auto& n : t.nodes_) {
    if (n.feature >= t.n_features_ || (n.feature >= 0 && (n.left <= 0 || n.left >= count || n.right <= 0 ||
                                                           n.right >= count))) {
      throw ModelError("corrupt tree artifact");
    }
  }
  return t;
}

RandomForest RandomForest::fit(const Matrix& X, std::span<const int> y, int n_classes, const ModelSpec& spec) {
  check_training_input(X, y, n_classes);
  const int d = static_cast<int>(X.cols());
  TreeParams params;
  params.max_depth = spec.max_depth;
  params.min_samples_split = spec.min_samples_split;
  params.max_features = spec.max_features > 0 ? std::min(spec.max_features, d)
                                              : std::max(1, static_cast<int>(std::floor(std::sqrt(double(d)))));

  RandomForest f;
  f.n_features_ = d;
  f.n_classes_ = n_classes;
  f.threads_ = spec.threads;
  f.trees_.resize(static_cast<std::size_t>(spec.n_trees));
  const std::size_t n = y.size();
  detail::parallel_for(f.trees_.size(), spec.threads, [&](std::size_t t) {
    std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(t + 1)));
    std::vector<double> w(n, 1.0);
    if (spec.bootstrap) {
      std::fill(w.begin(), w.end(), 0.0);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) w[pick(rng)] += 1.0;
    }
    f.trees_[t] = DecisionTree::fit(X, y, n_classes, params, w, rng());
  });
  return f;
}

std::vector<int> RandomForest::predict(const Matrix& X) const {
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<int> out(n);
  constexpr std::size_t kBlock = 256;
  detail::parallel_for((n + kBlock - 1) / kBlock, threads_, [&](std::size_t b) {
    std::vector<int> votes(static_cast<std::size_t>(n_classes_));
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
      std::fill(votes.begin(), votes.end(), 0);
      for (const auto& t : trees_) ++votes[static_cast<std::size_t>(t.predict_row(X, static_cast<Eigen::Index>(i)))];
      out[i] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
  });
  return out;
}

std::vector<double> RandomForest::feature_importance() const {
  std::vector<double> imp(static_cast<std::size_t>(n_features_), 0.0);
  if (trees_.empty()) return imp;
  for (const auto& t : trees_) {
    const auto ti = t.feature_importance();
    for (std::size_t j = 0; j < imp.size(); ++j) imp[j] += ti[j];
  }
  for (auto& v : imp) v /= static_cast<double>(trees_.size());
  return imp;
}

nlohmann::json RandomForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"n_features", n_features_}, {"n_classes", n_classes_}, {"trees", trees}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  RandomForest f;
  f.n_features_ = j.at("n_features").get<int>();
  f.n_classes_ = j.at("n_classes").get<int>();
  for (const auto& t : j.at("trees")) f.trees_.push_back(DecisionTree::from_json(t));
  return f;
}

}  // namespace dosml
