#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dosml/error.hpp"

namespace dosml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// How external CSV headers map onto the canonical feature dictionary.
struct CsvSchema {
  std::map<std::string, std::string> rename;  // external name -> canonical name
  std::set<std::string> ignore;               // external names skipped entirely
  std::set<std::string> metadata;             // extra canonical names kept as text
  std::string label_column = "label";
  bool accept_unknown = false;  // unknown numeric columns are kept under their own name

  // Column names used by the published LYCOS-IDS2017 CSVs that differ from ours.
  static CsvSchema lycos();
  // Flat key=value lines: rename.<ext>=<canon>, ignore=<a,b>, metadata=<a,b>,
  // label=<col>, accept_unknown=true|false.
  static CsvSchema parse(const std::string& text);
};

struct Dataset {
  Matrix X;
  std::vector<int> y;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  // Identification columns, one string vector per name, row-aligned with X.
  std::vector<std::string> meta_names;
  std::vector<std::vector<std::string>> meta;
  std::vector<std::string> provenance;
  std::size_t dropped_nonfinite = 0;
  std::size_t duplicate_rows = 0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(X.cols()); }
  int n_classes() const noexcept { return static_cast<int>(class_names.size()); }
  std::vector<std::size_t> class_counts() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset select_columns(std::span<const std::size_t> columns) const;
  Dataset with_features(Matrix X_new, std::vector<std::string> names, std::string note) const;
};

// "benign" (any case) is always label 0; other labels are numbered in order of
// first appearance. Rows with NaN, Inf or empty numeric cells are dropped.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
Dataset parse_csv(std::istream& in, const CsvSchema& schema = {}, const std::string& source = "<stream>");
void write_csv(std::ostream& out, const Dataset& ds);

// Stacks datasets with identical columns; class names are merged in order of
// first appearance, benign first.
Dataset concat(std::span<const Dataset> parts);
// A single CSV, or every *.csv in a directory (sorted by name) concatenated.
Dataset load_csv_path(const std::string& path, const CsvSchema& schema = {});

// The three URG counters (all-zero in the source data) and the identification
// columns.
const std::vector<std::string>& default_excluded_columns();
Dataset drop_excluded(const Dataset& ds, const std::vector<std::string>& excluded = default_excluded_columns());

struct SplitFractions {
  double train = 0.50;
  double validate = 0.25;
  double test = 0.25;
};

struct SplitIndices {
  std::vector<std::size_t> train, validate, test;
};

struct Split {
  Dataset train, validate, test;
  SplitIndices indices;
};

// Per-class seeded shuffle then contiguous cuts. Cut sizes use the largest
// remainder rule; ties go to train first, then validate.
SplitIndices stratified_split_indices(std::span<const int> y, int n_classes, SplitFractions f, std::uint64_t seed);
Split stratified_split(const Dataset& ds, SplitFractions f, std::uint64_t seed);
nlohmann::json split_manifest(const Dataset& ds, const SplitIndices& idx, SplitFractions f, std::uint64_t seed);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validate;
};

std::vector<Fold> stratified_kfold(std::span<const int> y, int n_classes, int k, std::uint64_t seed);

// Per-class cut sizes (train, validate, test) for n rows.
std::array<std::size_t, 3> split_sizes(std::size_t n, SplitFractions f);

class Scaler {
 public:
  static Scaler fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;
  Dataset apply(const Dataset& ds) const;

  const Vector& mean() const noexcept { return mean_; }
  const Vector& stddev() const noexcept { return std_; }
  const std::vector<bool>& constant() const noexcept { return constant_; }

  nlohmann::json to_json() const;
  static Scaler from_json(const nlohmann::json& j);

 private:
  Vector mean_;
  Vector std_;  // 1 where the column is constant
  std::vector<bool> constant_;
};

}  // namespace dosml
