#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dosml/classifiers.hpp"
#include "dosml/dataset.hpp"
#include "dosml/evaluation.hpp"
#include "dosml/features.hpp"
#include "dosml/flow_table.hpp"
#include "dosml/synth.hpp"

namespace dosml {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

// Flat key=value settings. Layers apply in order: defaults, config file,
// DOSML_* environment variables, command-line flags.
class RunConfig {
 public:
  static constexpr std::string_view kEnvPrefix = "DOSML_";
  static const std::vector<ConfigKey>& keys();

  RunConfig();

  void load_file(const std::string& path);
  void load_text(std::string_view text, const std::string& source);
  // env entries are "NAME=value" strings; defaults to the process environment.
  void apply_env(const std::vector<std::string>& env);
  void apply_process_env();
  void set(const std::string& key, const std::string& value, const std::string& source = "cli");

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  const std::string& source(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  // Sorted key=value lines that load_text reads back to the same settings.
  std::string serialize(const std::string& command) const;

  FlowConfig flow_config() const;
  FeatureConfig feature_config() const;
  SplitFractions split_fractions() const;
  ModelSpec model_spec(Family family) const;
  SweepConfig sweep_config() const;
  CompareConfig compare_config() const;
  BlobSpec blob_spec() const;
  CsvSchema csv_schema() const;
  std::vector<std::string> excluded_columns() const;

 private:
  std::int64_t duration_us(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> sources_;
};

}  // namespace dosml
