#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dosml/flow_table.hpp"

namespace dosml {

inline constexpr std::string_view kFeatureSchemaVersion = "dosml-flow-features/1";

struct FeatureInfo {
  std::string_view name;
  std::string_view unit;
  std::string_view group;
  std::string_view description;
  bool identification = false;  // carried as metadata, never learned from
};

// Every CSV column in output order: identification columns, numeric features,
// then "label".
std::span<const FeatureInfo> feature_dictionary();
std::optional<FeatureInfo> lookup_feature(std::string_view name);
// Names of the numeric (learnable) feature columns, in dictionary order.
const std::vector<std::string>& numeric_feature_names();
std::optional<std::size_t> numeric_feature_index(std::string_view name);

struct FeatureConfig {
  std::int64_t activity_threshold_us = 5'000'000;
  std::int64_t subflow_gap_us = 1'000'000;
  std::int64_t bulk_gap_us = 1'000'000;
  std::size_t bulk_min_packets = 4;
};

struct FeatureVector {
  std::string flow_id;
  std::uint32_t src_ip = 0;
  std::uint16_t src_port = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;
  std::int64_t timestamp_us = 0;
  std::vector<double> values;  // aligned with numeric_feature_names()
  std::string label;

  // Throws std::out_of_range for unknown names.
  double get(std::string_view name) const;
};

FeatureVector finalize(const FlowState& flow, const FeatureConfig& config = {}, std::string label = "benign");

void write_feature_csv_header(std::ostream& out);
void write_feature_csv_row(std::ostream& out, const FeatureVector& fv);

}  // namespace dosml
