#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dosml/features.hpp"
#include "dosml/packet.hpp"

using namespace dosml;

namespace {

PacketRecord pkt(std::int64_t ts, bool fwd, std::uint32_t len, std::uint8_t flags = tcp_flag::ack,
                 std::uint8_t proto = kProtoTcp) {
  PacketRecord p;
  p.ts_us = ts;
  p.src_ip = fwd ? 0x0A000001 : 0x0A000002;
  p.dst_ip = fwd ? 0x0A000002 : 0x0A000001;
  p.src_port = fwd ? 40000 : 80;
  p.dst_port = fwd ? 80 : 40000;
  p.protocol = proto;
  p.header_len = std::min<std::uint32_t>(len, 40);
  p.payload_len = len - p.header_len;
  if (proto == kProtoTcp) {
    p.tcp_flags = flags;
    p.tcp_window = fwd ? 1000 : 2000;
  }
  return p;
}

FlowState flow_of(const std::vector<PacketRecord>& pkts) {
  FlowState f;
  for (const auto& p : pkts) f.add(p);
  return f;
}

double pop_std(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("dictionary lookups") {
  const auto rst = lookup_feature("flag_rst");
  REQUIRE(rst);
  CHECK(rst->group == "Flags count");
  CHECK(rst->unit == "count");
  const auto idle = lookup_feature("idle_mean");
  REQUIRE(idle);
  CHECK(idle->group == "Active/idle");
  CHECK(idle->unit == "µs");
  CHECK_FALSE(lookup_feature("no_such_col"));
}

TEST_CASE("dictionary contains the named columns in a fixed order") {
  for (const char* name : {"flag_rst", "pkt_len_std", "fwd_subflow_bytes_mean", "flow_duration", "bwd_pkt_len_mean",
                           "bwd_pkt_len_tot", "iat_max", "iat_mean", "iat_std", "fwd_iat_tot", "idle_max",
                           "idle_min", "idle_mean", "fwd_urg_cnt", "bwd_urg_cnt", "flag_urg"}) {
    CHECK_MESSAGE(numeric_feature_index(name).has_value(), name);
  }
  const auto dict = feature_dictionary();
  CHECK(dict.front().name == "flow_id");
  CHECK(dict.back().name == "label");
  std::size_t numeric = 0;
  for (const auto& f : dict) {
    if (!f.identification && f.name != "label") ++numeric;
  }
  CHECK(numeric == numeric_feature_names().size());
  std::ostringstream a, b;
  write_feature_csv_header(a);
  write_feature_csv_header(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("flow_id,", 0) == 0);
}

TEST_CASE("single packet flow is degenerate but finite") {
  const auto fv = finalize(flow_of({pkt(5, true, 60)}));
  CHECK(fv.get("flow_duration") == 0);
  for (const char* n : {"iat_mean", "iat_std", "iat_max", "iat_min", "fwd_iat_tot", "bwd_iat_tot", "active_mean",
                        "active_std", "idle_mean", "idle_max", "pkt_len_std", "pkt_len_var"}) {
    CHECK_MESSAGE(fv.get(n) == 0, n);
  }
  for (double v : fv.values) CHECK(std::isfinite(v));
  CHECK(fv.get("fwd_pkt_cnt") == 1);
  CHECK(fv.get("bwd_pkt_cnt") == 0);
  CHECK(fv.timestamp_us == 5);
}

TEST_CASE("two forward packets one second apart") {
  const auto fv = finalize(flow_of({pkt(0, true, 100), pkt(1'000'000, true, 100)}));
  CHECK(fv.get("fwd_iat_tot") == 1'000'000);
  CHECK(fv.get("fwd_iat_mean") == 1'000'000);
  CHECK(fv.get("fwd_iat_std") == 0);
  CHECK(fv.get("pkt_len_mean") == 100);
  CHECK(fv.get("pkt_len_var") == 0);
  CHECK(fv.get("flow_duration") == 1'000'000);
  CHECK_THROWS_AS(fv.get("nope"), std::out_of_range);
}

TEST_CASE("length statistics use the population formula") {
  const auto fv = finalize(flow_of({pkt(0, true, 40), pkt(1, true, 1500), pkt(2, true, 40), pkt(3, false, 40)}));
  CHECK(fv.get("pkt_len_mean") == doctest::Approx(405));
  // hand value: sqrt((3 * 365^2 + 1095^2) / 4) = sqrt(399675)
  const double expected = pop_std({40, 1500, 40, 40});
  CHECK(expected == doctest::Approx(632.1985).epsilon(1e-6));
  CHECK(fv.get("pkt_len_std") == doctest::Approx(expected).epsilon(1e-12));
  CHECK(fv.get("pkt_len_var") == doctest::Approx(expected * expected).epsilon(1e-12));
  CHECK(fv.get("bwd_pkt_len_tot") == 40);
  CHECK(fv.get("fwd_pkt_len_tot") == 1580);
  CHECK(fv.get("fwd_pkt_len_max") == 1500);
  CHECK(fv.get("fwd_pkt_len_min") == 40);
  CHECK(fv.get("down_up_ratio") == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("flag counts and initial windows") {
  const auto fv = finalize(flow_of({pkt(0, true, 40, tcp_flag::syn), pkt(10, false, 40, tcp_flag::syn | tcp_flag::ack),
                                    pkt(20, true, 90, tcp_flag::psh | tcp_flag::ack),
                                    pkt(30, false, 40, tcp_flag::rst)}));
  CHECK(fv.get("flag_syn") == 2);
  CHECK(fv.get("flag_ack") == 2);
  CHECK(fv.get("flag_psh") == 1);
  CHECK(fv.get("flag_rst") == 1);
  CHECK(fv.get("flag_fin") == 0);
  CHECK(fv.get("fwd_psh_cnt") == 1);
  CHECK(fv.get("bwd_psh_cnt") == 0);
  CHECK(fv.get("init_win_bytes_fwd") == 1000);
  CHECK(fv.get("init_win_bytes_bwd") == 2000);
}

TEST_CASE("idle gaps above the activity threshold") {
  // bursts at 0..2 s and 20..21 s with a 18 s gap
  std::vector<PacketRecord> p{pkt(0, true, 100), pkt(1'000'000, false, 100), pkt(2'000'000, true, 100),
                              pkt(20'000'000, true, 100), pkt(21'000'000, false, 100)};
  const auto fv = finalize(flow_of(p));
  CHECK(fv.get("idle_mean") == 18'000'000);
  CHECK(fv.get("idle_min") == 18'000'000);
  CHECK(fv.get("active_mean") == 1'500'000);
  CHECK(fv.get("active_max") == 2'000'000);
  CHECK(fv.get("active_min") == 1'000'000);
  CHECK(fv.get("idle_mean") > fv.get("active_mean"));
}

TEST_CASE("min, mean and max are ordered for every stat group") {
  std::mt19937_64 rng(5);
  const auto& names = numeric_feature_names();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PacketRecord> p;
    std::int64_t ts = 0;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      p.push_back(pkt(ts, i == 0 || (rng() & 1), 40 + static_cast<std::uint32_t>(rng() % 1400)));
      ts += static_cast<std::int64_t>(rng() % 8'000'000);
    }
    const auto fv = finalize(flow_of(p));
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto& nm = names[i];
      if (nm.size() < 5 || nm.substr(nm.size() - 5) != "_mean") continue;
      const auto stem = nm.substr(0, nm.size() - 5);
      const auto lo = numeric_feature_index(stem + "_min");
      const auto hi = numeric_feature_index(stem + "_max");
      if (!lo || !hi) continue;
      CHECK(fv.values[*lo] <= fv.values[i] + 1e-9);
      CHECK(fv.values[i] <= fv.values[*hi] + 1e-9);
    }
    for (double v : fv.values) CHECK(std::isfinite(v));
    CHECK(fv.get("flow_duration") >= 0);
  }
}

TEST_CASE("time shift leaves every feature unchanged") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PacketRecord> p;
    std::int64_t ts = 0;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      p.push_back(pkt(ts, i == 0 || (rng() & 1), 40 + static_cast<std::uint32_t>(rng() % 1400),
                      static_cast<std::uint8_t>(rng())));
      ts += static_cast<std::int64_t>(rng() % 7'000'000);
    }
    auto shifted = p;
    const std::int64_t delta = 123'456'789'000;
    for (auto& q : shifted) q.ts_us += delta;
    const auto a = finalize(flow_of(p));
    const auto b = finalize(flow_of(shifted));
    CHECK(a.values == b.values);
    CHECK(b.timestamp_us == a.timestamp_us + delta);
  }
}

TEST_CASE("permuting backward packets never changes forward features") {
  std::mt19937_64 rng(13);
  const auto& names = numeric_feature_names();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PacketRecord> p;
    std::int64_t ts = 0;
    const int n = 2 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      p.push_back(pkt(ts, i == 0 || (rng() % 3 == 0), 40 + static_cast<std::uint32_t>(rng() % 1400),
                      static_cast<std::uint8_t>(rng())));
      ts += static_cast<std::int64_t>(rng() % 3'000'000);
    }
    // shuffle payload, flags and window among backward slots, keeping timestamps
    std::vector<std::size_t> bwd;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].src_port == 80) bwd.push_back(i);
    }
    auto perm = bwd;
    std::shuffle(perm.begin(), perm.end(), rng);
    auto q = p;
    for (std::size_t i = 0; i < bwd.size(); ++i) {
      const auto ts_keep = q[bwd[i]].ts_us;
      q[bwd[i]] = p[perm[i]];
      q[bwd[i]].ts_us = ts_keep;
    }
    const auto a = finalize(flow_of(p));
    const auto b = finalize(flow_of(q));
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i].rfind("fwd_", 0) == 0) CHECK_MESSAGE(a.values[i] == b.values[i], names[i]);
    }
  }
}

TEST_CASE("UDP flows carry no flag counts") {
  const auto fv = finalize(flow_of({pkt(0, true, 60, 0, kProtoUdp), pkt(10, false, 80, 0, kProtoUdp)}));
  CHECK(fv.get("flag_syn") == 0);
  CHECK(fv.get("init_win_bytes_fwd") == 0);
  CHECK(fv.protocol == kProtoUdp);
}

TEST_CASE("CSV row has one cell per dictionary column") {
  const auto fv = finalize(flow_of({pkt(0, true, 60), pkt(10, false, 80)}), {}, "dos_hulk");
  std::ostringstream out;
  write_feature_csv_row(out, fv);
  const auto row = out.str();
  CHECK(static_cast<std::size_t>(std::count(row.begin(), row.end(), ',')) + 1 == feature_dictionary().size());
  CHECK(row.find(",dos_hulk") != std::string::npos);
}
