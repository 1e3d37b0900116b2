#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dosml/dataset.hpp"
#include "dosml/features.hpp"
#include "dosml/flow_table.hpp"
#include "dosml/packet.hpp"

namespace dosml {

struct BlobSpec {
  std::size_t n_per_class = 200;
  int n_classes = 2;
  int d = 2;
  int n_informative = 2;
  double separation = 10;
  double noise = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Class means sit on a regular simplex with edge = separation when
// n_informative >= n_classes - 1, otherwise on hypercube corners spaced by
// separation. Class 0 is named "benign", the rest "attack_<k>".
Dataset gen_blobs(const BlobSpec& spec);

struct FlowScenario {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<PacketRecord> packets;
  nlohmann::json manifest;

  std::string fixture_text() const;
};

const std::vector<std::string>& scenario_catalog();
FlowScenario gen_flow_scenario(std::string_view name, std::uint64_t seed = 0);

// Compares extraction output against a scenario manifest; empty when it matches.
std::vector<std::string> check_manifest(const nlohmann::json& manifest, const ExtractionResult& extraction,
                                        const FeatureConfig& features = {});

}  // namespace dosml
