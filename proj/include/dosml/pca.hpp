#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dosml/dataset.hpp"

namespace dosml {

// All d components are retained; columns of `components` are unit eigenvectors
// of the population covariance ordered by descending eigenvalue, each signed so
// its largest-magnitude entry is positive.
struct PcaModel {
  Vector mean;
  Matrix components;
  Vector eigenvalues;
  Vector explained_variance_ratio;
  std::vector<std::string> feature_names;

  int dims() const noexcept { return static_cast<int>(mean.size()); }

  nlohmann::json to_json() const;
  static PcaModel from_json(const nlohmann::json& j);
};

PcaModel pca_fit(const Matrix& X, std::vector<std::string> feature_names = {});

// Smallest k whose cumulative ratio reaches target.
int select_components(const PcaModel& model, double variance_target);

Matrix pca_transform(const PcaModel& model, const Matrix& X, int k);
Matrix pca_inverse_transform(const PcaModel& model, const Matrix& scores);

struct ScreeRow {
  int component = 0;  // 1-based
  double eigenvalue = 0;
  double ratio = 0;
  double cumulative = 0;
};
std::vector<ScreeRow> scree_report(const PcaModel& model);

struct Loading {
  std::string feature;
  double loading = 0;
};
// For each of the first top_m components, every feature's signed loading,
// sorted by decreasing magnitude (ties by feature order).
std::vector<std::vector<Loading>> loadings_report(const PcaModel& model, int top_m = 3);

std::string scree_csv(const std::vector<ScreeRow>& rows);
std::string loadings_csv(const std::vector<std::vector<Loading>>& comps);

}  // namespace dosml
