#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dosml/packet.hpp"

namespace dosml {

struct Endpoint {
  std::uint32_t ip = 0;
  std::uint16_t port = 0;

  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

// Bidirectional flow identity; the numerically smaller endpoint is stored first
// so both directions of a conversation share one key.
struct FlowKey {
  Endpoint a;
  Endpoint b;
  std::uint8_t protocol = 0;

  static FlowKey of(const PacketRecord& pkt) noexcept;

  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& k) const noexcept;
};

enum class Direction : std::uint8_t { forward, backward };

struct FlowPacket {
  std::int64_t ts_us = 0;
  Direction dir = Direction::forward;
  std::uint8_t flags = 0;
  std::uint16_t window = 0;
  std::uint32_t header_len = 0;
  std::uint32_t payload_len = 0;

  // IP-level length: headers plus payload.
  std::uint32_t length() const noexcept { return header_len + payload_len; }
};

struct FlowState {
  FlowKey key;
  Endpoint initiator;  // source of the first packet; defines the forward direction
  Endpoint responder;
  std::int64_t start_ts_us = 0;
  std::int64_t last_ts_us = 0;
  std::vector<FlowPacket> packets;

  void add(const PacketRecord& pkt);
  std::size_t count(Direction d) const noexcept;
};

enum class CloseReason : std::uint8_t { fin, rst, timeout, end_of_capture };
std::string_view to_string(CloseReason r) noexcept;

struct ClosedFlow {
  FlowState flow;
  CloseReason reason = CloseReason::end_of_capture;
};

struct FlowConfig {
  std::int64_t udp_timeout_us = 120'000'000;
  std::int64_t tcp_timeout_us = 120'000'000;
  std::int64_t terminated_retention_us = 120'000'000;
  std::int64_t ooo_tolerance_us = 1'000;
};

struct FlowCounters {
  std::size_t packets_in = 0;
  std::size_t packets_assigned = 0;
  std::size_t dropped_terminated = 0;
  std::size_t flows_opened = 0;
  std::size_t flows_closed = 0;
};

// Single-writer bidirectional flow table. TCP flows close on the first FIN or
// RST; their key then sits on a terminated list that swallows further packets
// until a fresh SYN arrives or the entry ages out.
class FlowTable {
 public:
  explicit FlowTable(FlowConfig config = {});

  // Returns the flows closed by this packet (timeout of the previous flow on
  // the same key, and/or FIN/RST close of the current one).
  std::vector<ClosedFlow> process_packet(const PacketRecord& pkt);

  // Emits all live flows whose inactivity exceeds their protocol timeout.
  std::vector<ClosedFlow> expire_idle(std::int64_t now_us);

  // Emits every live flow and empties the table. Flows idle past their
  // timeout are reported as timeout, the rest as end_of_capture.
  std::vector<ClosedFlow> flush(std::int64_t now_us);

  const FlowCounters& counters() const noexcept { return counters_; }
  const FlowConfig& config() const noexcept { return config_; }
  std::size_t live_flows() const noexcept { return live_.size(); }
  std::size_t terminated_entries() const noexcept { return terminated_.size(); }
  bool is_terminated(const FlowKey& key) const { return terminated_.contains(key); }

 private:
  std::int64_t timeout_for(std::uint8_t protocol) const noexcept;
  void prune_terminated(std::int64_t now_us);
  ClosedFlow close(std::unordered_map<FlowKey, FlowState, FlowKeyHash>::iterator it, CloseReason reason);

  FlowConfig config_;
  FlowCounters counters_;
  std::int64_t clock_us_ = 0;
  bool started_ = false;
  std::unordered_map<FlowKey, FlowState, FlowKeyHash> live_;
  std::unordered_map<FlowKey, std::int64_t, FlowKeyHash> terminated_;
  std::deque<std::pair<std::int64_t, FlowKey>> terminated_order_;
};

struct ExtractionResult {
  std::vector<ClosedFlow> flows;  // ordered by start time, then key
  FlowCounters counters;
};

// Runs a whole packet sequence through a table, expiring idle flows as the
// capture clock advances, and flushes at the last timestamp.
ExtractionResult extract_flows(std::span<const PacketRecord> packets, const FlowConfig& config = {});

}  // namespace dosml
