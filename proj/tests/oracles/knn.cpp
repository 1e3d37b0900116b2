#include <algorithm>
#include <utility>

#include "oracles.hpp"

namespace oracle {

std::vector<std::size_t> knn_indices(const Rows& ref, int k, const std::vector<double>& q) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    double d = 0;
    for (std::size_t j = 0; j < q.size(); ++j) d += (ref[i][j] - q[j]) * (ref[i][j] - q[j]);
    all.emplace_back(d, i);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < all.size() && static_cast<int>(i) < k; ++i) out.push_back(all[i].second);
  return out;
}

int knn_predict(const Rows& ref, const std::vector<int>& y, int n_classes, int k, const std::vector<double>& q) {
  const auto nn = knn_indices(ref, k, q);
  std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
  for (auto i : nn) ++votes[static_cast<std::size_t>(y[i])];
  const int top = *std::max_element(votes.begin(), votes.end());
  // nearest neighbour among the tied classes wins
  for (auto i : nn) {
    if (votes[static_cast<std::size_t>(y[i])] == top) return y[i];
  }
  return -1;
}

}  // namespace oracle
