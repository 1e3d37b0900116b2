#include "dosml/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <bit>
#include <cctype>
#include <limits>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dosml/features.hpp"
#include "dosml/io.hpp"

namespace dosml {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : split_csv_line(s)) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

enum class ColumnRole { numeric, metadata, label, ignored };

struct Column {
  ColumnRole role = ColumnRole::ignored;
  std::size_t slot = 0;
};

// Empty cells read as NaN. Returns false only for non-numeric text.
bool parse_cell(std::string_view cell, double& out) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '"')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '"')) cell.remove_suffix(1);
  if (cell.empty()) {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  if (ec == std::errc::result_out_of_range) {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (ec == std::errc{} && ptr == cell.data() + cell.size()) return true;
  const auto l = lower(std::string(cell));
  if (l == "infinity" || l == "inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (l == "-infinity") {
    out = -std::numeric_limits<double>::infinity();
    return true;
  }
  return false;
}

std::uint64_t hash_row(std::span<const double> row, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : row) {
    h ^= std::bit_cast<std::uint64_t>(v);
    h *= 0x100000001b3ULL;
    h ^= h >> 31;
  }
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

CsvSchema CsvSchema::lycos() {
  CsvSchema s;
  s.rename = {
      {"src_addr", "src_ip"},
      {"dst_addr", "dst_ip"},
      {"ip_prot", "protocol"},
      {"pkt_per_s", "pkts_per_s"},
      {"fwd_pkt_hdr_len_tot", "fwd_hdr_len_tot"},
      {"bwd_pkt_hdr_len_tot", "bwd_hdr_len_tot"},
      {"flag_SYN", "flag_syn"},
      {"flag_cwr", "flag_cwe"},
      {"fwd_flag_psh", "fwd_psh_cnt"},
      {"bwd_flag_psh", "bwd_psh_cnt"},
      {"fwd_flag_urg", "fwd_urg_cnt"},
      {"bwd_flag_urg", "bwd_urg_cnt"},
      {"fwd_bulk_bytes_mean", "fwd_bytes_per_bulk_avg"},
      {"fwd_bulk_pkt_mean", "fwd_pkts_per_bulk_avg"},
      {"fwd_bulk_rate_mean", "fwd_bulk_rate_avg"},
      {"bwd_bulk_bytes_mean", "bwd_bytes_per_bulk_avg"},
      {"bwd_bulk_pkt_mean", "bwd_pkts_per_bulk_avg"},
      {"bwd_bulk_rate_mean", "bwd_bulk_rate_avg"},
      {"fwd_subflow_pkt_mean", "fwd_subflow_pkts_mean"},
      {"bwd_subflow_pkt_mean", "bwd_subflow_pkts_mean"},
      {"fwd_TCP_init_win_bytes", "init_win_bytes_fwd"},
      {"bwd_TCP_init_win_bytes", "init_win_bytes_bwd"},
  };
  s.accept_unknown = true;
  return s;
}

CsvSchema CsvSchema::parse(const std::string& text) {
  CsvSchema s;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("schema line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto value = trim(std::string_view(t).substr(eq + 1));
    if (key.rfind("rename.", 0) == 0) {
      s.rename[key.substr(7)] = value;
    } else if (key == "ignore") {
      for (auto& c : split_list(value)) s.ignore.insert(c);
    } else if (key == "metadata") {
      for (auto& c : split_list(value)) s.metadata.insert(c);
    } else if (key == "label") {
      s.label_column = value;
    } else if (key == "accept_unknown") {
      s.accept_unknown = value == "true" || value == "1";
    } else {
      throw ConfigError("schema line " + std::to_string(line_no) + ": unknown key " + key);
    }
  }
  return s;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (int label : y) ++counts.at(static_cast<std::size_t>(label));
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> rows_idx) const {
  Dataset out;
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.meta_names = meta_names;
  out.provenance = provenance;
  out.X.resize(static_cast<Eigen::Index>(rows_idx.size()), X.cols());
  out.y.resize(rows_idx.size());
  out.meta.assign(meta.size(), {});
  for (auto& m : out.meta) m.reserve(rows_idx.size());
  for (std::size_t i = 0; i < rows_idx.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows_idx[i]);
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(r);
    out.y[i] = y[rows_idx[i]];
    for (std::size_t m = 0; m < meta.size(); ++m) out.meta[m].push_back(meta[m][rows_idx[i]]);
  }
  return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> columns) const {
  Dataset out = *this;
  out.X.resize(X.rows(), static_cast<Eigen::Index>(columns.size()));
  out.feature_names.clear();
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.X.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(columns[j]));
    out.feature_names.push_back(feature_names.at(columns[j]));
  }
  return out;
}

Dataset Dataset::with_features(Matrix X_new, std::vector<std::string> names, std::string note) const {
  if (static_cast<std::size_t>(X_new.rows()) != y.size() || static_cast<std::size_t>(X_new.cols()) != names.size()) {
    throw DimensionError("replacement feature matrix does not match labels or names");
  }
  Dataset out;
  out.X = std::move(X_new);
  out.y = y;
  out.feature_names = std::move(names);
  out.class_names = class_names;
  out.meta_names = meta_names;
  out.meta = meta;
  out.provenance = provenance;
  out.provenance.push_back(std::move(note));
  return out;
}

Dataset parse_csv(std::istream& in, const CsvSchema& schema, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw SchemaError(source + ": empty file or missing header");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_csv_line(line);
  std::vector<Column> columns(header.size());
  Dataset ds;
  bool have_label = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string ext = trim(header[c]);
    if (schema.ignore.contains(ext)) continue;
    if (ext == schema.label_column) {
      if (have_label) throw SchemaError(source + ": duplicate label column");
      columns[c] = {ColumnRole::label, 0};
      have_label = true;
      continue;
    }
    const auto renamed = schema.rename.find(ext);
    const std::string canon = renamed == schema.rename.end() ? ext : renamed->second;
    const auto info = lookup_feature(canon);
    if ((info && info->identification) || schema.metadata.contains(canon)) {
      columns[c] = {ColumnRole::metadata, ds.meta_names.size()};
      ds.meta_names.push_back(canon);
    } else if ((info && canon != "label") || schema.accept_unknown) {
      if (std::find(ds.feature_names.begin(), ds.feature_names.end(), canon) != ds.feature_names.end()) {
        throw SchemaError(source + ": column " + canon + " appears twice");
      }
      columns[c] = {ColumnRole::numeric, ds.feature_names.size()};
      ds.feature_names.push_back(canon);
    } else {
      throw SchemaError(source + ": unknown column '" + ext + "' with no mapping");
    }
  }
  if (!have_label) throw SchemaError(source + ": no '" + schema.label_column + "' column");

  const std::size_t d = ds.feature_names.size();
  std::vector<double> values;
  std::vector<double> row(d);
  std::vector<std::string> meta_row(ds.meta_names.size());
  ds.meta.assign(ds.meta_names.size(), {});
  std::unordered_map<std::string, int> label_ids;
  std::vector<std::string> first_seen;
  std::vector<std::string> raw_labels;
  std::unordered_set<std::uint64_t> seen_rows;
  std::size_t line_no = 1;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                  " fields, got " + std::to_string(cells.size()));
    }
    bool finite = true;
    std::string label;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      switch (columns[c].role) {
        case ColumnRole::numeric: {
          double v = 0;
          if (!parse_cell(cells[c], v)) {
            throw Error(source + ":" + std::to_string(line_no) + ": column " + ds.feature_names[columns[c].slot] +
                        " is not numeric: '" + std::string(cells[c]) + "'");
          }
          if (!std::isfinite(v)) finite = false;
          row[columns[c].slot] = v;
          break;
        }
        case ColumnRole::metadata: meta_row[columns[c].slot] = trim(cells[c]); break;
        case ColumnRole::label: label = trim(cells[c]); break;
        case ColumnRole::ignored: break;
      }
    }
    if (!finite) {
      ++ds.dropped_nonfinite;
      continue;
    }
    if (label.empty()) throw Error(source + ":" + std::to_string(line_no) + ": empty label");
    if (!seen_rows.insert(hash_row(row, label)).second) ++ds.duplicate_rows;
    values.insert(values.end(), row.begin(), row.end());
    for (std::size_t m = 0; m < meta_row.size(); ++m) ds.meta[m].push_back(meta_row[m]);
    if (!label_ids.contains(label)) {
      label_ids.emplace(label, 0);
      first_seen.push_back(label);
    }
    raw_labels.push_back(std::move(label));
  }

  // Benign is pinned to index 0 so the false-positive rate is always defined
  // against the same class.
  auto benign = std::find_if(first_seen.begin(), first_seen.end(),
                             [](const std::string& l) { return lower(l) == "benign"; });
  if (benign != first_seen.end()) std::rotate(first_seen.begin(), benign, benign + 1);
  for (std::size_t i = 0; i < first_seen.size(); ++i) label_ids[first_seen[i]] = static_cast<int>(i);
  ds.class_names = first_seen;

  const std::size_t n = raw_labels.size();
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.y[i] = label_ids[raw_labels[i]];
  ds.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  ds.provenance.push_back("loaded " + source + ": " + std::to_string(n) + " rows, " + std::to_string(d) +
                          " features, dropped_nonfinite=" + std::to_string(ds.dropped_nonfinite) +
                          ", duplicate_rows=" + std::to_string(ds.duplicate_rows));
  return ds;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_csv(in, schema, path);
}

Dataset concat(std::span<const Dataset> parts) {
  if (parts.empty()) throw Error("nothing to concatenate");
  Dataset out;
  out.feature_names = parts[0].feature_names;
  out.meta_names = parts[0].meta_names;
  std::vector<std::string> names;
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.feature_names != out.feature_names || p.meta_names != out.meta_names) {
      throw SchemaError("cannot concatenate datasets with different columns");
    }
    for (const auto& c : p.class_names) {
      if (std::find(names.begin(), names.end(), c) == names.end()) names.push_back(c);
    }
    n += p.rows();
  }
  auto benign = std::find_if(names.begin(), names.end(), [](const std::string& l) { return lower(l) == "benign"; });
  if (benign != names.end()) std::rotate(names.begin(), benign, benign + 1);
  out.class_names = names;

  out.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out.feature_names.size()));
  out.y.reserve(n);
  out.meta.assign(out.meta_names.size(), {});
  Eigen::Index row = 0;
  for (const auto& p : parts) {
    std::vector<int> remap;
    for (const auto& c : p.class_names) {
      remap.push_back(static_cast<int>(std::find(names.begin(), names.end(), c) - names.begin()));
    }
    out.X.middleRows(row, p.X.rows()) = p.X;
    row += p.X.rows();
    for (int label : p.y) out.y.push_back(remap[static_cast<std::size_t>(label)]);
    for (std::size_t m = 0; m < p.meta.size(); ++m) {
      out.meta[m].insert(out.meta[m].end(), p.meta[m].begin(), p.meta[m].end());
    }
    out.provenance.insert(out.provenance.end(), p.provenance.begin(), p.provenance.end());
    out.dropped_nonfinite += p.dropped_nonfinite;
    out.duplicate_rows += p.duplicate_rows;
  }
  return out;
}

Dataset load_csv_path(const std::string& path, const CsvSchema& schema) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(path, ec)) return load_csv(path, schema);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.is_regular_file() && lower(e.path().extension().string()) == ".csv") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no .csv files in " + path);
  std::vector<Dataset> parts;
  for (const auto& f : files) parts.push_back(load_csv(f, schema));
  if (parts.size() == 1) return std::move(parts.front());
  return concat(parts);
}

void write_csv(std::ostream& out, const Dataset& ds) {
  bool first = true;
  auto sep = [&] {
    if (!first) out << ',';
    first = false;
  };
  for (const auto& m : ds.meta_names) sep(), out << m;
  for (const auto& f : ds.feature_names) sep(), out << f;
  sep(), out << "label\n";
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    first = true;
    for (const auto& m : ds.meta) sep(), out << m[i];
    for (Eigen::Index j = 0; j < ds.X.cols(); ++j) sep(), out << format_exact(ds.X(static_cast<Eigen::Index>(i), j));
    sep(), out << ds.class_names.at(static_cast<std::size_t>(ds.y[i])) << '\n';
  }
}

const std::vector<std::string>& default_excluded_columns() {
  static const std::vector<std::string> cols = {
      "fwd_urg_cnt", "bwd_urg_cnt", "flag_urg", "flow_id", "src_ip", "src_port", "dst_ip", "dst_port", "protocol",
  };
  return cols;
}

Dataset drop_excluded(const Dataset& ds, const std::vector<std::string>& excluded) {
  const std::set<std::string> drop(excluded.begin(), excluded.end());
  std::vector<std::size_t> keep;
  std::vector<std::string> removed;
  for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
    if (drop.contains(ds.feature_names[j])) {
      removed.push_back(ds.feature_names[j]);
    } else {
      keep.push_back(j);
    }
  }
  Dataset out = ds.select_columns(keep);
  // Identification columns never enter the feature matrix; all of them go.
  for (const auto& m : ds.meta_names) removed.push_back(m);
  out.meta_names.clear();
  out.meta.clear();
  std::string note = "drop_excluded removed:";
  for (const auto& r : removed) note += ' ' + r;
  if (removed.empty()) note += " (none)";
  out.provenance.push_back(std::move(note));
  return out;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, SplitFractions f) {
  const std::array<double, 3> exact = {n * f.train, n * f.validate, n * f.test};
  std::array<std::size_t, 3> sizes{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    sizes[i] = static_cast<std::size_t>(std::floor(exact[i] + 1e-9));
    assigned += sizes[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return exact[a] - std::floor(exact[a] + 1e-9) > exact[b] - std::floor(exact[b] + 1e-9) + 1e-12;
  });
  for (std::size_t r = 0; assigned + r < n && r < 3; ++r) ++sizes[order[r]];
  return sizes;
}

namespace {

std::vector<std::vector<std::size_t>> rows_by_class(std::span<const int> y, int n_classes) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= n_classes) throw DimensionError("label out of range");
    by_class[static_cast<std::size_t>(y[i])].push_back(i);
  }
  return by_class;
}

}  // namespace

SplitIndices stratified_split_indices(std::span<const int> y, int n_classes, SplitFractions f, std::uint64_t seed) {
  if (std::fabs(f.train + f.validate + f.test - 1.0) > 1e-9 || f.train < 0 || f.validate < 0 || f.test < 0) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  auto by_class = rows_by_class(y, n_classes);
  std::mt19937_64 rng(seed);
  SplitIndices out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) throw StratificationError("class " + std::to_string(c) + " has no rows to split");
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto sizes = split_sizes(rows.size(), f);
    auto it = rows.begin();
    out.train.insert(out.train.end(), it, it + static_cast<std::ptrdiff_t>(sizes[0]));
    it += static_cast<std::ptrdiff_t>(sizes[0]);
    out.validate.insert(out.validate.end(), it, it + static_cast<std::ptrdiff_t>(sizes[1]));
    it += static_cast<std::ptrdiff_t>(sizes[1]);
    out.test.insert(out.test.end(), it, rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validate.begin(), out.validate.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Split stratified_split(const Dataset& ds, SplitFractions f, std::uint64_t seed) {
  Split s;
  s.indices = stratified_split_indices(ds.y, ds.n_classes(), f, seed);
  s.train = ds.subset(s.indices.train);
  s.validate = ds.subset(s.indices.validate);
  s.test = ds.subset(s.indices.test);
  const std::string note = "stratified_split seed=" + std::to_string(seed);
  for (Dataset* part : {&s.train, &s.validate, &s.test}) part->provenance.push_back(note);
  return s;
}

nlohmann::json split_manifest(const Dataset& ds, const SplitIndices& idx, SplitFractions f, std::uint64_t seed) {
  auto count = [&](const std::vector<std::size_t>& rows) {
    std::vector<std::size_t> c(ds.class_names.size(), 0);
    for (auto r : rows) ++c[static_cast<std::size_t>(ds.y[r])];
    return c;
  };
  const auto tr = count(idx.train), va = count(idx.validate), te = count(idx.test);
  const auto all = ds.class_counts();
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    classes.push_back({{"name", ds.class_names[c]},
                       {"total", all[c]},
                       {"train", tr[c]},
                       {"validate", va[c]},
                       {"test", te[c]}});
  }
  return {{"seed", seed},
          {"fractions", {{"train", f.train}, {"validate", f.validate}, {"test", f.test}}},
          {"classes", classes},
          {"total",
           {{"rows", ds.rows()},
            {"train", idx.train.size()},
            {"validate", idx.validate.size()},
            {"test", idx.test.size()}}}};
}

std::vector<Fold> stratified_kfold(std::span<const int> y, int n_classes, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  auto by_class = rows_by_class(y, n_classes);
  std::string offenders;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty() && by_class[c].size() < static_cast<std::size_t>(k)) {
      offenders += " class " + std::to_string(c) + " (" + std::to_string(by_class[c].size()) + " rows)";
    }
  }
  if (!offenders.empty()) {
    throw StratificationError("classes smaller than k=" + std::to_string(k) + ":" + offenders);
  }
  std::vector<int> fold_of(y.size(), 0);
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t i = 0; i < rows.size(); ++i) fold_of[rows[i]] = static_cast<int>((offset + i) % k);
    offset += rows.size();
  }
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      (fold_of[i] == f ? folds[f].validate : folds[f].train).push_back(i);
    }
  }
  return folds;
}

Scaler Scaler::fit(const Matrix& X) {
  if (X.rows() == 0) throw DimensionError("cannot fit a scaler on zero rows");
  Scaler s;
  const double n = static_cast<double>(X.rows());
  s.mean_ = X.colwise().sum().transpose() / n;
  s.std_.resize(X.cols());
  s.constant_.assign(static_cast<std::size_t>(X.cols()), false);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - s.mean_(j)).square().sum() / n;
    if (var > 0) {
      s.std_(j) = std::sqrt(var);
    } else {
      s.std_(j) = 1.0;
      s.constant_[static_cast<std::size_t>(j)] = true;
    }
  }
  return s;
}

Matrix Scaler::apply(const Matrix& X) const {
  if (X.cols() != mean_.size()) {
    throw DimensionError("scaler fitted on " + std::to_string(mean_.size()) + " columns, got " +
                         std::to_string(X.cols()));
  }
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (constant_[static_cast<std::size_t>(j)]) {
      out.col(j).setZero();
    } else {
      out.col(j) = (X.col(j).array() - mean_(j)) / std_(j);
    }
  }
  return out;
}

Dataset Scaler::apply(const Dataset& ds) const {
  return ds.with_features(apply(ds.X), ds.feature_names, "zscore");
}

nlohmann::json Scaler::to_json() const {
  return {{"mean", std::vector<double>(mean_.data(), mean_.data() + mean_.size())},
          {"std", std::vector<double>(std_.data(), std_.data() + std_.size())},
          {"constant", constant_}};
}

Scaler Scaler::from_json(const nlohmann::json& j) {
  Scaler s;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("std").get<std::vector<double>>();
  s.mean_ = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.std_ = Eigen::Map<const Vector>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  s.constant_ = j.at("constant").get<std::vector<bool>>();
  if (s.std_.size() != s.mean_.size() || s.constant_.size() != static_cast<std::size_t>(s.mean_.size())) {
    throw ModelError("inconsistent scaler artifact");
  }
  return s;
}

}  // namespace dosml
