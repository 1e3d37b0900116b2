#include "dosml/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dosml/io.hpp"

namespace dosml {

PcaModel pca_fit(const Matrix& X, std::vector<std::string> feature_names) {
  if (X.rows() < 2) throw DimensionError("PCA needs at least two rows");
  if (!X.allFinite()) throw DimensionError("PCA input contains non-finite values");
  const Eigen::Index d = X.cols();
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != d) {
    throw DimensionError("feature name count does not match PCA input width");
  }
  if (feature_names.empty()) {
    for (Eigen::Index j = 0; j < d; ++j) feature_names.push_back("f" + std::to_string(j));
  }

  PcaModel m;
  m.feature_names = std::move(feature_names);
  const double n = static_cast<double>(X.rows());
  m.mean = X.colwise().sum().transpose() / n;
  const Matrix centered = X.rowwise() - m.mean.transpose();
  Matrix cov = (centered.transpose() * centered) / n;
  cov = (cov + cov.transpose()) * 0.5;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return solver.eigenvalues()(a) > solver.eigenvalues()(b);
  });

  m.components.resize(d, d);
  m.eigenvalues.resize(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    Vector v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    m.components.col(c) = v;
    m.eigenvalues(c) = std::max(0.0, solver.eigenvalues()(src));
  }
  const double total = m.eigenvalues.sum();
  m.explained_variance_ratio = total > 0 ? Vector(m.eigenvalues / total) : Vector::Zero(d);
  return m;
}

int select_components(const PcaModel& model, double variance_target) {
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw ConfigError("variance target must lie in (0, 1]");
  }
  double cumulative = 0.0;
  const int d = static_cast<int>(model.explained_variance_ratio.size());
  for (int k = 0; k < d; ++k) {
    cumulative += model.explained_variance_ratio(k);
    // Rounding leaves the full cumulative sum a few ulps below 1.
    if (cumulative >= variance_target - 1e-12) return k + 1;
  }
  return d;
}

Matrix pca_transform(const PcaModel& model, const Matrix& X, int k) {
  if (X.cols() != model.mean.size()) {
    throw DimensionError("PCA fitted on " + std::to_string(model.mean.size()) + " columns, got " +
                         std::to_string(X.cols()));
  }
  if (k < 0 || k > model.dims()) throw DimensionError("component count out of range");
  return (X.rowwise() - model.mean.transpose()) * model.components.leftCols(k);
}

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& scores) {
  if (scores.cols() > model.dims()) throw DimensionError("more score columns than components");
  return (scores * model.components.leftCols(scores.cols()).transpose()).rowwise() + model.mean.transpose();
}

std::vector<ScreeRow> scree_report(const PcaModel& model) {
  std::vector<ScreeRow> rows;
  double cumulative = 0.0;
  for (int c = 0; c < model.dims(); ++c) {
    cumulative += model.explained_variance_ratio(c);
    rows.push_back({c + 1, model.eigenvalues(c), model.explained_variance_ratio(c), std::min(1.0, cumulative)});
  }
  return rows;
}

std::vector<std::vector<Loading>> loadings_report(const PcaModel& model, int top_m) {
  if (top_m < 0 || top_m > model.dims()) throw DimensionError("top_m exceeds the number of components");
  std::vector<std::vector<Loading>> out;
  for (int c = 0; c < top_m; ++c) {
    std::vector<Loading> comp;
    for (int j = 0; j < model.dims(); ++j) {
      comp.push_back({model.feature_names.at(static_cast<std::size_t>(j)), model.components(j, c)});
    }
    std::stable_sort(comp.begin(), comp.end(),
                     [](const Loading& a, const Loading& b) { return std::fabs(a.loading) > std::fabs(b.loading); });
    out.push_back(std::move(comp));
  }
  return out;
}

std::string scree_csv(const std::vector<ScreeRow>& rows) {
  std::ostringstream out;
  out << "component,eigenvalue,ratio,cumulative\n";
  for (const auto& r : rows) {
    out << r.component << ',' << format_number(r.eigenvalue) << ',' << format_number(r.ratio) << ','
        << format_number(r.cumulative) << '\n';
  }
  return out.str();
}

std::string loadings_csv(const std::vector<std::vector<Loading>>& comps) {
  std::ostringstream out;
  out << "component,rank,feature,loading\n";
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (std::size_t r = 0; r < comps[c].size(); ++r) {
      out << c + 1 << ',' << r + 1 << ',' << comps[c][r].feature << ',' << format_number(comps[c][r].loading) << '\n';
    }
  }
  return out.str();
}

namespace {
std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }
Vector from_vec(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }
}  // namespace

nlohmann::json PcaModel::to_json() const {
  std::vector<std::vector<double>> comps;
  for (Eigen::Index c = 0; c < components.cols(); ++c) comps.push_back(to_vec(components.col(c)));
  return {{"format", "dosml-pca/1"},
          {"feature_names", feature_names},
          {"mean", to_vec(mean)},
          {"eigenvalues", to_vec(eigenvalues)},
          {"explained_variance_ratio", to_vec(explained_variance_ratio)},
          {"components", comps}};
}

PcaModel PcaModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "dosml-pca/1") throw ModelError("not a dosml-pca/1 artifact");
  PcaModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.mean = from_vec(j.at("mean").get<std::vector<double>>());
  m.eigenvalues = from_vec(j.at("eigenvalues").get<std::vector<double>>());
  m.explained_variance_ratio = from_vec(j.at("explained_variance_ratio").get<std::vector<double>>());
  const auto comps = j.at("components").get<std::vector<std::vector<double>>>();
  const auto d = m.mean.size();
  if (static_cast<Eigen::Index>(comps.size()) != d) throw ModelError("component count mismatch in PCA artifact");
  m.components.resize(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    if (static_cast<Eigen::Index>(comps[c].size()) != d) throw ModelError("component width mismatch in PCA artifact");
    m.components.col(c) = from_vec(comps[c]);
  }
  return m;
}

}  // namespace dosml
