#include "dosml/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "dosml/io.hpp"

namespace dosml {

namespace {

constexpr std::string_view kUs = "µs";

// clang-format off
constexpr std::array kDictionary = {
    FeatureInfo{"flow_id", "text", "Decision tuple", "forward 5-tuple as src:port-dst:port-proto", true},
    FeatureInfo{"src_ip", "ipv4", "Decision tuple", "forward source address", true},
    FeatureInfo{"src_port", "port", "Decision tuple", "forward source port", true},
    FeatureInfo{"dst_ip", "ipv4", "Decision tuple", "forward destination address", true},
    FeatureInfo{"dst_port", "port", "Decision tuple", "forward destination port", true},
    FeatureInfo{"protocol", "number", "Decision tuple", "IP protocol number", true},
    FeatureInfo{"timestamp", kUs, "Time", "timestamp of the first packet", true},

    FeatureInfo{"flow_duration", kUs, "Time", "last minus first packet timestamp"},

    FeatureInfo{"fwd_pkt_cnt", "count", "Fwd pkts", "forward packets"},
    FeatureInfo{"fwd_pkt_len_tot", "bytes", "Fwd pkts", "sum of forward packet lengths"},
    FeatureInfo{"fwd_pkt_len_max", "bytes", "Fwd pkts", "largest forward packet"},
    FeatureInfo{"fwd_pkt_len_min", "bytes", "Fwd pkts", "smallest forward packet"},
    FeatureInfo{"fwd_pkt_len_mean", "bytes", "Fwd pkts", "mean forward packet length"},
    FeatureInfo{"fwd_pkt_len_std", "bytes", "Fwd pkts", "population std of forward packet length"},
    FeatureInfo{"fwd_non_empty_pkt_cnt", "count", "Fwd pkts", "forward packets carrying payload"},

    FeatureInfo{"bwd_pkt_cnt", "count", "Bwd pkts", "backward packets"},
    FeatureInfo{"bwd_pkt_len_tot", "bytes", "Bwd pkts", "sum of backward packet lengths"},
    FeatureInfo{"bwd_pkt_len_max", "bytes", "Bwd pkts", "largest backward packet"},
    FeatureInfo{"bwd_pkt_len_min", "bytes", "Bwd pkts", "smallest backward packet"},
    FeatureInfo{"bwd_pkt_len_mean", "bytes", "Bwd pkts", "mean backward packet length"},
    FeatureInfo{"bwd_pkt_len_std", "bytes", "Bwd pkts", "population std of backward packet length"},
    FeatureInfo{"bwd_non_empty_pkt_cnt", "count", "Bwd pkts", "backward packets carrying payload"},

    FeatureInfo{"iat_mean", kUs, "IAT", "mean gap between consecutive packets"},
    FeatureInfo{"iat_std", kUs, "IAT", "population std of packet gaps"},
    FeatureInfo{"iat_max", kUs, "IAT", "largest packet gap"},
    FeatureInfo{"iat_min", kUs, "IAT", "smallest packet gap"},

    FeatureInfo{"fwd_iat_tot", kUs, "Fwd IAT", "sum of forward packet gaps"},
    FeatureInfo{"fwd_iat_mean", kUs, "Fwd IAT", "mean forward packet gap"},
    FeatureInfo{"fwd_iat_std", kUs, "Fwd IAT", "population std of forward packet gaps"},
    FeatureInfo{"fwd_iat_max", kUs, "Fwd IAT", "largest forward packet gap"},
    FeatureInfo{"fwd_iat_min", kUs, "Fwd IAT", "smallest forward packet gap"},

    FeatureInfo{"bwd_iat_tot", kUs, "Bwd IAT", "sum of backward packet gaps"},
    FeatureInfo{"bwd_iat_mean", kUs, "Bwd IAT", "mean backward packet gap"},
    FeatureInfo{"bwd_iat_std", kUs, "Bwd IAT", "population std of backward packet gaps"},
    FeatureInfo{"bwd_iat_max", kUs, "Bwd IAT", "largest backward packet gap"},
    FeatureInfo{"bwd_iat_min", kUs, "Bwd IAT", "smallest backward packet gap"},

    FeatureInfo{"fwd_psh_cnt", "count", "Fwd flags", "forward packets with PSH"},
    FeatureInfo{"fwd_urg_cnt", "count", "Fwd flags", "forward packets with URG"},
    FeatureInfo{"bwd_psh_cnt", "count", "Flags", "backward packets with PSH"},
    FeatureInfo{"bwd_urg_cnt", "count", "Flags", "backward packets with URG"},

    FeatureInfo{"flag_fin", "count", "Flags count", "packets with FIN"},
    FeatureInfo{"flag_syn", "count", "Flags count", "packets with SYN"},
    FeatureInfo{"flag_rst", "count", "Flags count", "packets with RST"},
    FeatureInfo{"flag_psh", "count", "Flags count", "packets with PSH"},
    FeatureInfo{"flag_ack", "count", "Flags count", "packets with ACK"},
    FeatureInfo{"flag_urg", "count", "Flags count", "packets with URG"},
    FeatureInfo{"flag_cwe", "count", "Flags count", "packets with CWR"},
    FeatureInfo{"flag_ece", "count", "Flags count", "packets with ECE"},

    FeatureInfo{"pkt_len_min", "bytes", "Pkts len/size", "smallest packet"},
    FeatureInfo{"pkt_len_max", "bytes", "Pkts len/size", "largest packet"},
    FeatureInfo{"pkt_len_mean", "bytes", "Pkts len/size", "mean packet length"},
    FeatureInfo{"pkt_len_std", "bytes", "Pkts len/size", "population std of packet length"},
    FeatureInfo{"pkt_len_var", "bytes^2", "Pkts len/size", "population variance of packet length"},
    FeatureInfo{"pkt_size_avg", "bytes", "Pkts len/size", "total bytes over packet count"},

    FeatureInfo{"down_up_ratio", "ratio", "Pkt loss", "backward over forward packet count"},
    FeatureInfo{"bytes_per_s", "bytes/s", "Time", "total bytes over duration (0 for zero duration)"},
    FeatureInfo{"pkts_per_s", "packets/s", "Time", "packets over duration (0 for zero duration)"},

    FeatureInfo{"fwd_hdr_len_tot", "bytes", "Fwd pkt header", "sum of forward header lengths"},
    FeatureInfo{"fwd_seg_size_avg", "bytes", "Fwd pkt header", "mean forward payload size"},
    FeatureInfo{"fwd_bytes_per_bulk_avg", "bytes", "Fwd pkt header", "forward bulk payload bytes per bulk"},
    FeatureInfo{"fwd_pkts_per_bulk_avg", "count", "Fwd pkt header", "forward bulk packets per bulk"},
    FeatureInfo{"fwd_bulk_rate_avg", "bytes/s", "Fwd pkt header", "forward bulk bytes over bulk duration"},

    FeatureInfo{"bwd_hdr_len_tot", "bytes", "Bwd pkt header", "sum of backward header lengths"},
    FeatureInfo{"bwd_seg_size_avg", "bytes", "Bwd pkt header", "mean backward payload size"},
    FeatureInfo{"bwd_bytes_per_bulk_avg", "bytes", "Bwd pkt header", "backward bulk payload bytes per bulk"},
    FeatureInfo{"bwd_pkts_per_bulk_avg", "count", "Bwd pkt header", "backward bulk packets per bulk"},
    FeatureInfo{"bwd_bulk_rate_avg", "bytes/s", "Bwd pkt header", "backward bulk bytes over bulk duration"},

    FeatureInfo{"fwd_subflow_pkts_mean", "count", "Subflow", "forward packets per subflow"},
    FeatureInfo{"fwd_subflow_bytes_mean", "bytes", "Subflow", "forward bytes per subflow"},
    FeatureInfo{"bwd_subflow_pkts_mean", "count", "Subflow", "backward packets per subflow"},
    FeatureInfo{"bwd_subflow_bytes_mean", "bytes", "Subflow", "backward bytes per subflow"},

    FeatureInfo{"init_win_bytes_fwd", "bytes", "Init win Bytes", "TCP window of the first forward packet"},
    FeatureInfo{"init_win_bytes_bwd", "bytes", "Init win Bytes", "TCP window of the first backward packet"},

    FeatureInfo{"active_mean", kUs, "Active/idle", "mean active segment duration"},
    FeatureInfo{"active_std", kUs, "Active/idle", "population std of active segment duration"},
    FeatureInfo{"active_max", kUs, "Active/idle", "longest active segment"},
    FeatureInfo{"active_min", kUs, "Active/idle", "shortest active segment"},
    FeatureInfo{"idle_mean", kUs, "Active/idle", "mean idle gap"},
    FeatureInfo{"idle_std", kUs, "Active/idle", "population std of idle gaps"},
    FeatureInfo{"idle_max", kUs, "Active/idle", "longest idle gap"},
    FeatureInfo{"idle_min", kUs, "Active/idle", "shortest idle gap"},

    // No definition is known for these two; always 0.
    FeatureInfo{"inbound", "flag", "Other labels", "constant 0"},
    FeatureInfo{"similar_http", "flag", "Other labels", "constant 0"},

    FeatureInfo{"label", "text", "Label", "class name"},
};
// clang-format on

struct Summary {
  double total = 0, mean = 0, stddev = 0, var = 0, min = 0, max = 0;
  std::size_t n = 0;
};

// Two-pass population statistics; all zero for an empty sample.
Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.min = xs[0];
  s.max = xs[0];
  for (double x : xs) {
    s.total += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = s.total / static_cast<double>(s.n);
  double ss = 0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.var = ss / static_cast<double>(s.n);
  s.stddev = std::sqrt(s.var);
  // Keep min <= mean <= max when rounding nudges the mean.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

struct BulkStats {
  double bytes_per_bulk = 0, pkts_per_bulk = 0, rate = 0;
};

BulkStats bulk_stats(std::span<const FlowPacket> pkts, Direction dir, const FeatureConfig& cfg) {
  std::size_t bulks = 0, bulk_pkts = 0;
  double bulk_bytes = 0, bulk_dur_us = 0;
  std::size_t run_n = 0;
  double run_bytes = 0;
  std::int64_t run_start = 0, run_last = 0;
  auto finish = [&] {
    if (run_n >= cfg.bulk_min_packets) {
      ++bulks;
      bulk_pkts += run_n;
      bulk_bytes += run_bytes;
      bulk_dur_us += static_cast<double>(run_last - run_start);
    }
    run_n = 0;
    run_bytes = 0;
  };
  for (const auto& p : pkts) {
    if (p.payload_len == 0 || p.dir != dir) continue;
    if (run_n > 0 && p.ts_us - run_last > cfg.bulk_gap_us) finish();
    if (run_n == 0) run_start = p.ts_us;
    ++run_n;
    run_bytes += p.payload_len;
    run_last = p.ts_us;
  }
  finish();
  BulkStats out;
  if (bulks > 0) {
    out.bytes_per_bulk = bulk_bytes / static_cast<double>(bulks);
    out.pkts_per_bulk = static_cast<double>(bulk_pkts) / static_cast<double>(bulks);
    out.rate = bulk_dur_us > 0 ? bulk_bytes / (bulk_dur_us / 1e6) : 0.0;
  }
  return out;
}

}  // namespace

std::span<const FeatureInfo> feature_dictionary() { return kDictionary; }

std::optional<FeatureInfo> lookup_feature(std::string_view name) {
  for (const auto& f : kDictionary) {
    if (f.name == name) return f;
  }
  return std::nullopt;
}

const std::vector<std::string>& numeric_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : kDictionary) {
      if (!f.identification && f.name != "label") out.emplace_back(f.name);
    }
    return out;
  }();
  return names;
}

std::optional<std::size_t> numeric_feature_index(std::string_view name) {
  static const std::unordered_map<std::string_view, std::size_t> index = [] {
    std::unordered_map<std::string_view, std::size_t> m;
    const auto& names = numeric_feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) m.emplace(names[i], i);
    return m;
  }();
  auto it = index.find(name);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

double FeatureVector::get(std::string_view name) const {
  auto idx = numeric_feature_index(name);
  if (!idx) throw std::out_of_range("no numeric feature named " + std::string(name));
  return values.at(*idx);
}

FeatureVector finalize(const FlowState& flow, const FeatureConfig& cfg, std::string label) {
  std::vector<FlowPacket> pkts = flow.packets;
  std::stable_sort(pkts.begin(), pkts.end(),
                   [](const FlowPacket& l, const FlowPacket& r) { return l.ts_us < r.ts_us; });

  FeatureVector fv;
  fv.src_ip = flow.initiator.ip;
  fv.src_port = flow.initiator.port;
  fv.dst_ip = flow.responder.ip;
  fv.dst_port = flow.responder.port;
  fv.protocol = flow.key.protocol;
  fv.timestamp_us = flow.start_ts_us;
  fv.flow_id = format_ipv4(fv.src_ip) + ':' + std::to_string(fv.src_port) + '-' + format_ipv4(fv.dst_ip) + ':' +
               std::to_string(fv.dst_port) + '-' + std::to_string(fv.protocol);
  fv.label = std::move(label);

  std::vector<double> all_len, len[2], iat, dir_iat[2];
  double hdr[2] = {0, 0}, payload[2] = {0, 0};
  double non_empty[2] = {0, 0}, psh[2] = {0, 0}, urg[2] = {0, 0};
  double init_win[2] = {0, 0};
  bool seen[2] = {false, false};
  std::int64_t last_dir_ts[2] = {0, 0};
  double flag_fin = 0, flag_syn = 0, flag_rst = 0, flag_psh = 0, flag_ack = 0, flag_urg = 0, flag_cwr = 0,
         flag_ece = 0;

  std::vector<double> active, idle;
  std::int64_t seg_start = pkts.empty() ? 0 : pkts.front().ts_us;
  std::size_t subflows = pkts.empty() ? 0 : 1;

  for (std::size_t i = 0; i < pkts.size(); ++i) {
    const auto& p = pkts[i];
    const int d = p.dir == Direction::forward ? 0 : 1;
    const double l = p.length();
    all_len.push_back(l);
    len[d].push_back(l);
    hdr[d] += p.header_len;
    payload[d] += p.payload_len;
    if (p.payload_len > 0) non_empty[d] += 1;
    if (p.flags & tcp_flag::psh) psh[d] += 1;
    if (p.flags & tcp_flag::urg) urg[d] += 1;
    flag_fin += (p.flags & tcp_flag::fin) ? 1 : 0;
    flag_syn += (p.flags & tcp_flag::syn) ? 1 : 0;
    flag_rst += (p.flags & tcp_flag::rst) ? 1 : 0;
    flag_psh += (p.flags & tcp_flag::psh) ? 1 : 0;
    flag_ack += (p.flags & tcp_flag::ack) ? 1 : 0;
    flag_urg += (p.flags & tcp_flag::urg) ? 1 : 0;
    flag_cwr += (p.flags & tcp_flag::cwr) ? 1 : 0;
    flag_ece += (p.flags & tcp_flag::ece) ? 1 : 0;

    if (seen[d]) {
      dir_iat[d].push_back(static_cast<double>(p.ts_us - last_dir_ts[d]));
    } else {
      init_win[d] = p.window;
      seen[d] = true;
    }
    last_dir_ts[d] = p.ts_us;

    if (i > 0) {
      const std::int64_t gap = p.ts_us - pkts[i - 1].ts_us;
      iat.push_back(static_cast<double>(gap));
      if (gap > cfg.activity_threshold_us) {
        active.push_back(static_cast<double>(pkts[i - 1].ts_us - seg_start));
        idle.push_back(static_cast<double>(gap));
        seg_start = p.ts_us;
      }
      if (gap > cfg.subflow_gap_us) ++subflows;
    }
  }
  if (!pkts.empty()) active.push_back(static_cast<double>(pkts.back().ts_us - seg_start));

  const Summary s_all = summarize(all_len), s_fwd = summarize(len[0]), s_bwd = summarize(len[1]);
  const Summary s_iat = summarize(iat), s_fiat = summarize(dir_iat[0]), s_biat = summarize(dir_iat[1]);
  const Summary s_active = summarize(active), s_idle = summarize(idle);
  const BulkStats b_fwd = bulk_stats(pkts, Direction::forward, cfg);
  const BulkStats b_bwd = bulk_stats(pkts, Direction::backward, cfg);

  const double n_pkts = static_cast<double>(pkts.size());
  const double n_fwd = static_cast<double>(s_fwd.n), n_bwd = static_cast<double>(s_bwd.n);
  const double duration = pkts.empty() ? 0.0 : static_cast<double>(flow.last_ts_us - flow.start_ts_us);
  const double sub = subflows > 0 ? static_cast<double>(subflows) : 1.0;
  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };

  fv.values = {
      duration,
      n_fwd, s_fwd.total, s_fwd.max, s_fwd.min, s_fwd.mean, s_fwd.stddev, non_empty[0],
      n_bwd, s_bwd.total, s_bwd.max, s_bwd.min, s_bwd.mean, s_bwd.stddev, non_empty[1],
      s_iat.mean, s_iat.stddev, s_iat.max, s_iat.min,
      s_fiat.total, s_fiat.mean, s_fiat.stddev, s_fiat.max, s_fiat.min,
      s_biat.total, s_biat.mean, s_biat.stddev, s_biat.max, s_biat.min,
      psh[0], urg[0], psh[1], urg[1],
      flag_fin, flag_syn, flag_rst, flag_psh, flag_ack, flag_urg, flag_cwr, flag_ece,
      s_all.min, s_all.max, s_all.mean, s_all.stddev, s_all.var, ratio(s_all.total, n_pkts),
      ratio(n_bwd, n_fwd),
      ratio(s_all.total, duration / 1e6), ratio(n_pkts, duration / 1e6),
      hdr[0], ratio(payload[0], n_fwd), b_fwd.bytes_per_bulk, b_fwd.pkts_per_bulk, b_fwd.rate,
      hdr[1], ratio(payload[1], n_bwd), b_bwd.bytes_per_bulk, b_bwd.pkts_per_bulk, b_bwd.rate,
      n_fwd / sub, s_fwd.total / sub, n_bwd / sub, s_bwd.total / sub,
      init_win[0], init_win[1],
      s_active.mean, s_active.stddev, s_active.max, s_active.min,
      s_idle.mean, s_idle.stddev, s_idle.max, s_idle.min,
      0.0, 0.0,
  };
  if (fv.values.size() != numeric_feature_names().size()) {
    throw std::logic_error("feature vector does not match the dictionary");
  }
  return fv;
}

void write_feature_csv_header(std::ostream& out) {
  bool first = true;
  for (const auto& f : kDictionary) {
    if (!first) out << ',';
    out << f.name;
    first = false;
  }
  out << '\n';
}

void write_feature_csv_row(std::ostream& out, const FeatureVector& fv) {
  out << fv.flow_id << ',' << format_ipv4(fv.src_ip) << ',' << fv.src_port << ',' << format_ipv4(fv.dst_ip) << ','
      << fv.dst_port << ',' << static_cast<int>(fv.protocol) << ',' << fv.timestamp_us;
  for (double v : fv.values) out << ',' << format_number(v);
  out << ',' << fv.label << '\n';
}

}  // namespace dosml
