#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"

namespace oracle {

namespace {

double gini_of(const std::vector<std::size_t>& rows, const std::vector<int>& y, int n_classes) {
  if (rows.empty()) return 0;
  std::vector<double> c(static_cast<std::size_t>(n_classes), 0);
  for (auto r : rows) c[static_cast<std::size_t>(y[r])] += 1;
  double g = 1;
  for (double v : c) {
    const double p = v / static_cast<double>(rows.size());
    g -= p * p;
  }
  return g;
}

int majority_of(const std::vector<std::size_t>& rows, const std::vector<int>& y, int n_classes) {
  std::vector<int> c(static_cast<std::size_t>(n_classes), 0);
  for (auto r : rows) ++c[static_cast<std::size_t>(y[r])];
  return static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
}

int grow(Cart& t, const Rows& X, const std::vector<int>& y, int n_classes, std::vector<std::size_t> rows, int depth,
         int max_depth, double min_split) {
  const int idx = static_cast<int>(t.nodes.size());
  t.nodes.push_back({});
  t.nodes[idx].label = majority_of(rows, y, n_classes);
  std::set<int> labels;
  for (auto r : rows) labels.insert(y[r]);
  if (labels.size() <= 1 || depth >= max_depth || static_cast<double>(rows.size()) < min_split) return idx;

  const double n = static_cast<double>(rows.size());
  const std::size_t d = X[0].size();
  bool found = false;
  int bf = -1;
  double bt = 0, best = 0;
  for (std::size_t f = 0; f < d; ++f) {
    std::set<double> values;
    for (auto r : rows) values.insert(X[r][f]);
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      double thr = v[i] + (v[i + 1] - v[i]) / 2;
      if (!(thr < v[i + 1])) thr = v[i];
      std::vector<std::size_t> l, r;
      for (auto row : rows) (X[row][f] <= thr ? l : r).push_back(row);
      const double imp = (static_cast<double>(l.size()) * gini_of(l, y, n_classes) +
                          static_cast<double>(r.size()) * gini_of(r, y, n_classes));
      const double tol = 1e-12 * n;
      if (!found || imp < best - tol) {
        found = true;
        bf = static_cast<int>(f);
        bt = thr;
        best = imp;
      }
    }
  }
  if (!found) return idx;
  std::vector<std::size_t> l, r;
  for (auto row : rows) (X[row][static_cast<std::size_t>(bf)] <= bt ? l : r).push_back(row);
  t.nodes[idx].feature = bf;
  t.nodes[idx].threshold = bt;
  const int li = grow(t, X, y, n_classes, l, depth + 1, max_depth, min_split);
  t.nodes[idx].left = li;
  const int ri = grow(t, X, y, n_classes, r, depth + 1, max_depth, min_split);
  t.nodes[idx].right = ri;
  return idx;
}

}  // namespace

int Cart::predict(const std::vector<double>& x) const {
  int n = 0;
  while (nodes[n].feature >= 0) n = x[static_cast<std::size_t>(nodes[n].feature)] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
  return nodes[n].label;
}

Cart fit_cart(const Rows& X, const std::vector<int>& y, int n_classes, int max_depth, double min_samples_split) {
  Cart t;
  std::vector<std::size_t> rows(X.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  grow(t, X, y, n_classes, rows, 0, max_depth, min_samples_split);
  return t;
}

}  // namespace oracle
