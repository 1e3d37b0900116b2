#include "dosml/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dosml/io.hpp"

extern char** environ;

namespace dosml {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

const std::vector<ConfigKey>& RunConfig::keys() {
  static const std::vector<ConfigKey> k{
      {"input", "", "input file or directory"},
      {"output", "out", "output directory"},
      {"seed", "42", "seed for splits, folds and randomized models"},
      {"threads", "0", "worker threads, 0 = hardware concurrency"},
      {"csv_timing", "false", "add wall-clock columns to CSV tables (breaks byte-identical reruns)"},

      {"udp_timeout_us", "120000000", "UDP inactivity timeout"},
      {"tcp_timeout_us", "120000000", "TCP inactivity timeout"},
      {"terminated_retention_us", "120000000", "how long a closed TCP key keeps swallowing packets"},
      {"ooo_tolerance_us", "1000", "allowed timestamp regression before a capture is rejected"},
      {"activity_threshold_us", "5000000", "gap that ends an active period"},
      {"subflow_gap_us", "1000000", "gap that starts a new subflow"},
      {"bulk_gap_us", "1000000", "largest gap inside a bulk transfer"},
      {"bulk_min_packets", "4", "payload packets needed for a bulk transfer"},
      {"label", "benign", "label written on extracted flows"},

      {"schema", "", "CSV schema: empty (dictionary names only), open (keep unknown numeric columns), lycos, or a schema file"},
      {"exclude", "default", "columns dropped before learning: default, none, or a comma list"},
      {"split_train", "0.5", "train fraction"},
      {"split_validate", "0.25", "validation fraction"},
      {"split_test", "0.25", "test fraction"},

      {"variance_targets", "0.5,0.6,0.7,0.8,0.9,0.95,0.99", "explained-variance targets for the sweep"},
      {"folds", "5", "cross-validation folds for the sweep"},
      {"sweep_model", "DT", "classifier family used inside the sweep"},
      {"compare_variance", "0.8", "variance target for the PCA arm of compare"},
      {"models", "DT,RF,KNN,LDA,QDA,SVM_LINEAR", "families in the comparison tables"},
      {"breakdown_model", "DT", "family whose per-class breakdown is written"},
      {"importance_top", "6", "features kept when refitting on the top importances"},
      {"loadings_top", "3", "loadings listed per component"},
      {"pipeline_steps", "sweep,compare,importance,pca", "steps run by the pipeline command"},
      {"min_accuracy", "", "fail with exit 3 when a reported accuracy is below this (0..1)"},
      {"max_fpr", "", "fail with exit 3 when a reported FPR is above this (0..1)"},

      {"max_depth", "30", "tree depth limit"},
      {"min_samples_split", "2", "smallest node that may be split"},
      {"n_trees", "100", "forest size"},
      {"bootstrap", "true", "bootstrap rows per tree"},
      {"max_features", "0", "features tried per split, 0 = family default"},
      {"knn_k", "5", "neighbours"},
      {"knn_kdtree", "true", "use the k-d tree search"},
      {"ridge_scale", "1e-6", "discriminant covariance ridge, times trace / d"},
      {"svm_epochs", "20", "passes over the data"},
      {"svm_lambda", "0", "regularization, 0 = 1 / N"},

      {"blobs_n_per_class", "200", "rows per class"},
      {"blobs_classes", "2", "classes"},
      {"blobs_d", "2", "dimensions"},
      {"blobs_informative", "2", "dimensions carrying class signal"},
      {"blobs_separation", "10", "distance between class means"},
      {"blobs_noise", "1", "noise standard deviation"},
      {"scenario", "all", "flow scenario name or all"},

      {"lycos_dir", "", "directory holding the LYCOS-IDS2017 CSVs for the dataset criterion"},
  };
  return k;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) {
    values_[std::string(k.name)] = std::string(k.default_value);
    sources_[std::string(k.name)] = "default";
  }
}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& source) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "' (from " + source + ")");
  it->second = value;
  sources_[key] = source;
}

void RunConfig::load_text(std::string_view text, const std::string& source) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    set(trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
        source + ":" + std::to_string(line_no));
  }
}

void RunConfig::load_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  load_text(text, path);
}

void RunConfig::apply_env(const std::vector<std::string>& env) {
  for (const auto& entry : env) {
    if (entry.rfind(kEnvPrefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(kEnvPrefix.size(), eq - kEnvPrefix.size());
    for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    set(key, entry.substr(eq + 1), "env " + entry.substr(0, eq));
  }
}

void RunConfig::apply_process_env() {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) env.emplace_back(*e);
  std::sort(env.begin(), env.end());
  apply_env(env);
}

bool RunConfig::has(const std::string& key) const { return values_.contains(key); }

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

const std::string& RunConfig::source(const std::string& key) const {
  get(key);
  return sources_.at(key);
}

double RunConfig::get_double(const std::string& key) const {
  const auto& v = get(key);
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long RunConfig::get_int(const std::string& key) const {
  const auto& v = get(key);
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const auto& v = get(key);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool RunConfig::get_bool(const std::string& key) const {
  std::string v = get(key);
  for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + get(key) + "'");
}

std::optional<double> RunConfig::get_optional_double(const std::string& key) const {
  if (trim(get(key)).empty()) return std::nullopt;
  return get_double(key);
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  const auto& v = get(key);
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    auto item = trim(std::string_view(v).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) {
    double v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size()) {
      throw ConfigError(key + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::serialize(const std::string& command) const {
  std::ostringstream out;
  out << "# resolved configuration for: " << command << '\n';
  for (const auto& [k, v] : values_) out << k << '=' << v << '\n';
  return out.str();
}

FlowConfig RunConfig::flow_config() const {
  FlowConfig c;
  c.udp_timeout_us = duration_us("udp_timeout_us");
  c.tcp_timeout_us = duration_us("tcp_timeout_us");
  c.terminated_retention_us = duration_us("terminated_retention_us");
  c.ooo_tolerance_us = duration_us("ooo_tolerance_us");
  return c;
}

FeatureConfig RunConfig::feature_config() const {
  FeatureConfig c;
  c.activity_threshold_us = duration_us("activity_threshold_us");
  c.subflow_gap_us = duration_us("subflow_gap_us");
  c.bulk_gap_us = duration_us("bulk_gap_us");
  const auto m = get_int("bulk_min_packets");
  if (m < 1) throw ConfigError("bulk_min_packets must be >= 1");
  c.bulk_min_packets = static_cast<std::size_t>(m);
  return c;
}

std::int64_t RunConfig::duration_us(const std::string& key) const {
  const auto v = get_int(key);
  if (v < 0) throw ConfigError(key + " must be >= 0");
  return v;
}

SplitFractions RunConfig::split_fractions() const {
  SplitFractions f{get_double("split_train"), get_double("split_validate"), get_double("split_test")};
  if (f.train < 0 || f.validate < 0 || f.test < 0 || std::fabs(f.train + f.validate + f.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  return f;
}

ModelSpec RunConfig::model_spec(Family family) const {
  ModelSpec s;
  s.family = family;
  s.seed = get_u64("seed");
  s.max_depth = static_cast<int>(get_int("max_depth"));
  s.min_samples_split = get_double("min_samples_split");
  s.n_trees = static_cast<int>(get_int("n_trees"));
  s.bootstrap = get_bool("bootstrap");
  s.max_features = static_cast<int>(get_int("max_features"));
  s.k = static_cast<int>(get_int("knn_k"));
  s.knn_kdtree = get_bool("knn_kdtree");
  s.ridge_scale = get_double("ridge_scale");
  s.svm_epochs = static_cast<int>(get_int("svm_epochs"));
  s.svm_lambda = get_double("svm_lambda");
  s.threads = static_cast<int>(get_int("threads"));
  s.validate();
  return s;
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig c;
  c.targets = get_double_list("variance_targets");
  c.folds = static_cast<int>(get_int("folds"));
  if (c.folds < 2) throw ConfigError("folds must be >= 2");
  c.seed = get_u64("seed");
  c.model = model_spec(parse_family(get("sweep_model")));
  c.threads = static_cast<int>(get_int("threads"));
  return c;
}

CompareConfig RunConfig::compare_config() const {
  CompareConfig c;
  c.variance_target = get_double("compare_variance");
  for (const auto& name : get_list("models")) c.specs.push_back(model_spec(parse_family(name)));
  if (c.specs.empty()) throw ConfigError("models must name at least one family");
  return c;
}

BlobSpec RunConfig::blob_spec() const {
  BlobSpec b;
  const auto n = get_int("blobs_n_per_class");
  if (n < 1) throw ConfigError("blobs_n_per_class must be >= 1");
  b.n_per_class = static_cast<std::size_t>(n);
  b.n_classes = static_cast<int>(get_int("blobs_classes"));
  b.d = static_cast<int>(get_int("blobs_d"));
  b.n_informative = static_cast<int>(get_int("blobs_informative"));
  b.separation = get_double("blobs_separation");
  b.noise = get_double("blobs_noise");
  b.seed = get_u64("seed");
  b.validate();
  return b;
}

CsvSchema RunConfig::csv_schema() const {
  const auto& s = get("schema");
  if (s.empty()) return {};
  if (s == "lycos") return CsvSchema::lycos();
  if (s == "open") {
    CsvSchema open;
    open.accept_unknown = true;
    return open;
  }
  try {
    return CsvSchema::parse(read_file(s));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
}

std::vector<std::string> RunConfig::excluded_columns() const {
  const auto& v = get("exclude");
  if (v == "default") return default_excluded_columns();
  if (v == "none") return {};
  return get_list("exclude");
}

}  // namespace dosml
