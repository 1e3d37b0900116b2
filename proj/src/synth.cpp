#include "dosml/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

namespace dosml {

void BlobSpec::validate() const {
  if (n_classes < 1) throw ConfigError("blobs: n_classes must be >= 1");
  if (n_per_class < 1) throw ConfigError("blobs: n_per_class must be >= 1");
  if (d < 1) throw ConfigError("blobs: d must be >= 1");
  if (n_informative < 0 || n_informative > d) throw ConfigError("blobs: n_informative must be in [0, d]");
  if (!(separation >= 0) || !std::isfinite(separation)) throw ConfigError("blobs: separation must be >= 0");
  if (!(noise >= 0) || !std::isfinite(noise)) throw ConfigError("blobs: noise must be >= 0");
  if (n_classes > 1 && n_informative < n_classes - 1) {
    if (n_informative == 0 || (n_informative < 31 && (1 << n_informative) < n_classes)) {
      throw ConfigError("blobs: too few informative dimensions to place " + std::to_string(n_classes) +
                        " distinct class means");
    }
  }
}

namespace {

// Rows are the class means in the first n_informative coordinates.
Matrix class_means(const BlobSpec& s) {
  const int C = s.n_classes;
  Matrix M = Matrix::Zero(C, s.n_informative);
  if (C == 1) return M;
  if (s.n_informative >= C - 1) {
    // Helmert basis of the plane orthogonal to (1, ..., 1); the unit vectors
    // e_k project to a regular simplex with edge sqrt(2).
    const double scale = s.separation / std::sqrt(2.0);
    for (int j = 1; j < C; ++j) {
      const double norm = std::sqrt(double(j) * (j + 1));
      for (int k = 0; k < j; ++k) M(k, j - 1) = scale / norm;
      M(j, j - 1) = -scale * j / norm;
    }
    return M;
  }
  // Even-parity corners first: any two differ in at least two coordinates,
  // and every informative coordinate ends up carrying signal.
  std::vector<unsigned> corners;
  const unsigned n_corners = 1u << s.n_informative;
  for (int parity = 0; parity < 2; ++parity) {
    for (unsigned c = 0; c < n_corners; ++c) {
      if (std::popcount(c) % 2 == parity) corners.push_back(c);
    }
  }
  for (int k = 0; k < C; ++k) {
    const unsigned c = corners[static_cast<std::size_t>(k)];
    for (int j = 0; j < s.n_informative; ++j) M(k, j) = ((c >> j) & 1) ? s.separation / 2 : -s.separation / 2;
  }
  return M;
}

}  // namespace

Dataset gen_blobs(const BlobSpec& spec) {
  spec.validate();
  const Matrix means = class_means(spec);
  const auto n = static_cast<Eigen::Index>(spec.n_per_class) * spec.n_classes;
  Dataset ds;
  ds.X = Matrix(n, spec.d);
  ds.y.resize(static_cast<std::size_t>(n));
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Index row = 0;
  for (int k = 0; k < spec.n_classes; ++k) {
    for (std::size_t i = 0; i < spec.n_per_class; ++i, ++row) {
      for (int j = 0; j < spec.d; ++j) {
        const double mu = j < spec.n_informative ? means(k, j) : 0.0;
        ds.X(row, j) = mu + spec.noise * gauss(rng);
      }
      ds.y[static_cast<std::size_t>(row)] = k;
    }
  }
  for (int j = 0; j < spec.d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  ds.class_names.push_back("benign");
  for (int k = 1; k < spec.n_classes; ++k) ds.class_names.push_back("attack_" + std::to_string(k));
  ds.provenance.push_back("blobs classes=" + std::to_string(spec.n_classes) + " d=" + std::to_string(spec.d) +
                          " informative=" + std::to_string(spec.n_informative) + " seed=" + std::to_string(spec.seed));
  return ds;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kTcpHeader = 40;
constexpr std::uint32_t kUdpHeader = 28;
constexpr std::int64_t kMs = 1000;
constexpr std::int64_t kSec = 1'000'000;

struct Hosts {
  std::uint32_t client;
  std::uint32_t server;
  std::uint16_t client_port;
};

Hosts pick_hosts(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Hosts h;
  h.client = (192u << 24) | (168u << 16) | static_cast<std::uint32_t>(1 + rng() % 250) << 8 |
             static_cast<std::uint32_t>(2 + rng() % 250);
  h.server = (10u << 24) | static_cast<std::uint32_t>(rng() % 250) << 8 | static_cast<std::uint32_t>(1 + rng() % 250);
  h.client_port = static_cast<std::uint16_t>(32768 + rng() % 28000);
  return h;
}

PacketRecord tcp(std::int64_t ts, const Hosts& h, bool from_client, std::uint16_t server_port, std::uint8_t flags,
                 std::uint32_t payload = 0, std::uint16_t window = 64240) {
  PacketRecord p;
  p.ts_us = ts;
  p.protocol = kProtoTcp;
  p.src_ip = from_client ? h.client : h.server;
  p.dst_ip = from_client ? h.server : h.client;
  p.src_port = from_client ? h.client_port : server_port;
  p.dst_port = from_client ? server_port : h.client_port;
  p.tcp_flags = flags;
  p.header_len = kTcpHeader;
  p.payload_len = payload;
  p.tcp_window = window;
  return p;
}

PacketRecord udp(std::int64_t ts, const Hosts& h, bool from_client, std::uint16_t server_port, std::uint32_t payload) {
  PacketRecord p;
  p.ts_us = ts;
  p.protocol = kProtoUdp;
  p.src_ip = from_client ? h.client : h.server;
  p.dst_ip = from_client ? h.server : h.client;
  p.src_port = from_client ? h.client_port : server_port;
  p.dst_port = from_client ? server_port : h.client_port;
  p.header_len = kUdpHeader;
  p.payload_len = payload;
  return p;
}

nlohmann::json expectation(std::vector<std::size_t> packets_per_flow, std::size_t dropped,
                           std::size_t packets_in) {
  return {{"flows", packets_per_flow.size()},
          {"packets_per_flow", packets_per_flow},
          {"dropped_terminated", dropped},
          {"packets_in", packets_in}};
}

using namespace tcp_flag;

}  // namespace

const std::vector<std::string>& scenario_catalog() {
  static const std::vector<std::string> names{"tcp_clean_close", "rst_suppression", "udp_timeout_split", "syn_flood",
                                              "slow_request"};
  return names;
}

FlowScenario gen_flow_scenario(std::string_view name, std::uint64_t seed) {
  FlowScenario s;
  s.name = std::string(name);
  s.seed = seed;
  const Hosts h = pick_hosts(seed);
  auto& P = s.packets;
  nlohmann::json expected;
  nlohmann::json checks = nlohmann::json::array();
  std::string description;

  if (name == "tcp_clean_close") {
    description = "handshake, one request, client FIN";
    P.push_back(tcp(0, h, true, 80, syn));
    P.push_back(tcp(10 * kMs, h, false, 80, syn | ack, 0, 65535));
    P.push_back(tcp(20 * kMs, h, true, 80, ack));
    P.push_back(tcp(30 * kMs, h, true, 80, psh | ack, 120));
    P.push_back(tcp(50 * kMs, h, true, 80, fin | ack));
    expected = expectation({5}, 0, 5);
    checks.push_back({{"flow", 0}, {"feature", "fwd_pkt_cnt"}, {"op", "eq"}, {"value", 4}});
    checks.push_back({{"flow", 0}, {"feature", "flag_fin"}, {"op", "eq"}, {"value", 1}});
  } else if (name == "rst_suppression") {
    description = "session reset by the server, a stray client ACK that must be dropped, then a fresh SYN";
    P.push_back(tcp(0, h, true, 80, syn));
    P.push_back(tcp(10 * kMs, h, false, 80, syn | ack, 0, 65535));
    P.push_back(tcp(20 * kMs, h, true, 80, ack));
    P.push_back(tcp(1 * kSec, h, true, 80, psh | ack, 300));
    P.push_back(tcp(5 * kSec, h, false, 80, rst | ack));
    P.push_back(tcp(6 * kSec, h, true, 80, ack));
    P.push_back(tcp(7 * kSec, h, true, 80, syn));
    P.push_back(tcp(7 * kSec + 10 * kMs, h, false, 80, syn | ack, 0, 65535));
    P.push_back(tcp(7 * kSec + 20 * kMs, h, true, 80, ack));
    P.push_back(tcp(7 * kSec + 500 * kMs, h, true, 80, fin | ack));
    expected = expectation({5, 4}, 1, 10);
    checks.push_back({{"flow", 0}, {"feature", "flag_rst"}, {"op", "eq"}, {"value", 1}});
    checks.push_back({{"flow", 1}, {"feature", "flag_rst"}, {"op", "eq"}, {"value", 0}});
  } else if (name == "udp_timeout_split") {
    description = "UDP exchange, a 120.5 s silence, another exchange on the same tuple";
    P.push_back(udp(0, h, true, 53, 40));
    P.push_back(udp(500 * kMs, h, false, 53, 120));
    P.push_back(udp(121 * kSec, h, true, 53, 40));
    P.push_back(udp(121 * kSec + 200 * kMs, h, false, 53, 120));
    expected = expectation({2, 2}, 0, 4);
    checks.push_back({{"flow", -1}, {"feature", "bwd_pkt_cnt"}, {"op", "eq"}, {"value", 1}});
  } else if (name == "syn_flood") {
    description = "1000 spoofed single-SYN half-open attempts, 1 ms apart";
    std::mt19937_64 rng(seed ^ 0x5eedULL);
    for (int i = 0; i < 1000; ++i) {
      Hosts src = h;
      src.client = (172u << 24) | (16u << 16) | static_cast<std::uint32_t>(i >> 8) << 8 |
                   static_cast<std::uint32_t>(i & 0xff);
      src.client_port = static_cast<std::uint16_t>(1024 + rng() % 60000);
      P.push_back(tcp(i * kMs, src, true, 80, syn, 0, 1024));
    }
    expected = expectation(std::vector<std::size_t>(1000, 1), 0, 1000);
    checks.push_back({{"flow", -1}, {"feature", "flag_syn"}, {"op", "eq"}, {"value", 1}});
    checks.push_back({{"flow", -1}, {"feature", "fwd_pkt_cnt"}, {"op", "eq"}, {"value", 1}});
  } else if (name == "slow_request") {
    description = "handshake then one small header fragment every 10 s, closed after a minute";
    P.push_back(tcp(0, h, true, 80, syn));
    P.push_back(tcp(10 * kMs, h, false, 80, syn | ack, 0, 65535));
    P.push_back(tcp(20 * kMs, h, true, 80, ack));
    for (int i = 1; i <= 5; ++i) P.push_back(tcp(i * 10 * kSec, h, true, 80, psh | ack, 24));
    P.push_back(tcp(60 * kSec, h, true, 80, fin | ack));
    expected = expectation({9}, 0, 9);
    checks.push_back({{"flow", 0}, {"feature", "idle_mean"}, {"op", "gt"}, {"other", "active_mean"}});
    checks.push_back({{"flow", 0}, {"feature", "idle_min"}, {"op", "ge"}, {"value", 9'980'000}});
  } else {
    std::string known;
    for (const auto& n : scenario_catalog()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown scenario '" + std::string(name) + "' (known: " + known + ")");
  }
  s.manifest = {{"scenario", s.name},
                {"seed", seed},
                {"description", description},
                {"expected", expected},
                {"feature_checks", checks}};
  return s;
}

std::string FlowScenario::fixture_text() const {
  std::string out = "# scenario " + name + " seed " + std::to_string(seed) + "\n";
  out += "# ts_us,src_ip,src_port,dst_ip,dst_port,proto,flags,hdr,payload,window\n";
  for (const auto& p : packets) out += to_fixture_line(p) + '\n';
  return out;
}

std::vector<std::string> check_manifest(const nlohmann::json& manifest, const ExtractionResult& extraction,
                                        const FeatureConfig& features) {
  std::vector<std::string> problems;
  const auto& exp = manifest.at("expected");
  const auto& flows = extraction.flows;
  const auto& c = extraction.counters;

  const auto n_flows = exp.at("flows").get<std::size_t>();
  if (flows.size() != n_flows) {
    problems.push_back("flows: expected " + std::to_string(n_flows) + ", got " + std::to_string(flows.size()));
  }
  const auto per_flow = exp.at("packets_per_flow").get<std::vector<std::size_t>>();
  for (std::size_t i = 0; i < std::min(per_flow.size(), flows.size()); ++i) {
    if (flows[i].flow.packets.size() != per_flow[i]) {
      problems.push_back("flow " + std::to_string(i) + ": expected " + std::to_string(per_flow[i]) +
                         " packets, got " + std::to_string(flows[i].flow.packets.size()));
    }
  }
  const auto dropped = exp.at("dropped_terminated").get<std::size_t>();
  if (c.dropped_terminated != dropped) {
    problems.push_back("dropped_terminated: expected " + std::to_string(dropped) + ", got " +
                       std::to_string(c.dropped_terminated));
  }
  const auto packets_in = exp.at("packets_in").get<std::size_t>();
  if (c.packets_in != packets_in) {
    problems.push_back("packets_in: expected " + std::to_string(packets_in) + ", got " + std::to_string(c.packets_in));
  }
  if (c.packets_assigned + c.dropped_terminated != c.packets_in) {
    problems.push_back("packet conservation violated");
  }

  std::vector<FeatureVector> fvs;
  for (const auto& f : flows) fvs.push_back(finalize(f.flow, features));
  for (const auto& chk : manifest.value("feature_checks", nlohmann::json::array())) {
    const int which = chk.at("flow").get<int>();
    const auto feature = chk.at("feature").get<std::string>();
    const auto op = chk.at("op").get<std::string>();
    for (std::size_t i = 0; i < fvs.size(); ++i) {
      if (which >= 0 && static_cast<std::size_t>(which) != i) continue;
      const double lhs = fvs[i].get(feature);
      const double rhs = chk.contains("other") ? fvs[i].get(chk.at("other").get<std::string>())
                                               : chk.at("value").get<double>();
      const bool ok = op == "eq" ? lhs == rhs : op == "gt" ? lhs > rhs : op == "ge" ? lhs >= rhs : false;
      if (!ok) {
        problems.push_back("flow " + std::to_string(i) + ": " + feature + " " + op + " check failed (" +
                           std::to_string(lhs) + " vs " + std::to_string(rhs) + ")");
      }
    }
    if (which >= 0 && static_cast<std::size_t>(which) >= fvs.size()) {
      problems.push_back("feature check refers to missing flow " + std::to_string(which));
    }
  }
  return problems;
}

}  // namespace dosml
