#include "dosml/flow_table.hpp"

#include <algorithm>

namespace dosml {

FlowKey FlowKey::of(const PacketRecord& pkt) noexcept {
  Endpoint src{pkt.src_ip, pkt.src_port};
  Endpoint dst{pkt.dst_ip, pkt.dst_port};
  if (dst < src) std::swap(src, dst);
  return FlowKey{src, dst, pkt.protocol};
}

std::size_t FlowKeyHash::operator()(const FlowKey& k) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(k.a.ip);
  mix(k.a.port);
  mix(k.b.ip);
  mix(k.b.port);
  mix(k.protocol);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

void FlowState::add(const PacketRecord& pkt) {
  if (packets.empty()) {
    initiator = {pkt.src_ip, pkt.src_port};
    responder = {pkt.dst_ip, pkt.dst_port};
    start_ts_us = pkt.ts_us;
    key = FlowKey::of(pkt);
  }
  const Endpoint src{pkt.src_ip, pkt.src_port};
  FlowPacket fp;
  fp.ts_us = pkt.ts_us;
  fp.dir = (src == initiator) ? Direction::forward : Direction::backward;
  fp.flags = pkt.tcp_flags;
  fp.window = pkt.tcp_window;
  fp.header_len = pkt.header_len;
  fp.payload_len = pkt.payload_len;
  packets.push_back(fp);
  // Packets accepted inside the reorder tolerance never move the clock back.
  last_ts_us = std::max(last_ts_us, pkt.ts_us);
  start_ts_us = std::min(start_ts_us, pkt.ts_us);
}

std::size_t FlowState::count(Direction d) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(packets.begin(), packets.end(), [d](const FlowPacket& p) { return p.dir == d; }));
}

std::string_view to_string(CloseReason r) noexcept {
  switch (r) {
    case CloseReason::fin: return "fin";
    case CloseReason::rst: return "rst";
    case CloseReason::timeout: return "timeout";
    case CloseReason::end_of_capture: return "end_of_capture";
  }
  return "unknown";
}

FlowTable::FlowTable(FlowConfig config) : config_(config) {}

std::int64_t FlowTable::timeout_for(std::uint8_t protocol) const noexcept {
  return protocol == kProtoTcp ? config_.tcp_timeout_us : config_.udp_timeout_us;
}

void FlowTable::prune_terminated(std::int64_t now_us) {
  while (!terminated_order_.empty() &&
         now_us - terminated_order_.front().first > config_.terminated_retention_us) {
    const auto [closed_at, key] = terminated_order_.front();
    terminated_order_.pop_front();
    // A key terminated again later has a newer entry further back in the queue.
    auto it = terminated_.find(key);
    if (it != terminated_.end() && it->second == closed_at) terminated_.erase(it);
  }
}

ClosedFlow FlowTable::close(std::unordered_map<FlowKey, FlowState, FlowKeyHash>::iterator it,
                            CloseReason reason) {
  ClosedFlow closed{std::move(it->second), reason};
  live_.erase(it);
  ++counters_.flows_closed;
  return closed;
}

std::vector<ClosedFlow> FlowTable::process_packet(const PacketRecord& pkt) {
  ++counters_.packets_in;
  if (!started_) {
    clock_us_ = pkt.ts_us;
    started_ = true;
  } else if (pkt.ts_us + config_.ooo_tolerance_us < clock_us_) {
    throw OutOfOrderPacket("packet at " + std::to_string(pkt.ts_us) + " us is more than " +
                           std::to_string(config_.ooo_tolerance_us) + " us behind the table clock " +
                           std::to_string(clock_us_));
  }
  clock_us_ = std::max(clock_us_, pkt.ts_us);
  prune_terminated(clock_us_);

  std::vector<ClosedFlow> closed;
  const FlowKey key = FlowKey::of(pkt);

  if (pkt.is_tcp()) {
    if (auto term = terminated_.find(key); term != terminated_.end()) {
      if (!pkt.has_flag(tcp_flag::syn)) {
        ++counters_.dropped_terminated;
        return closed;
      }
      terminated_.erase(term);
    }
  }

  auto it = live_.find(key);
  if (it != live_.end() && pkt.ts_us - it->second.last_ts_us > timeout_for(pkt.protocol)) {
    closed.push_back(close(it, CloseReason::timeout));
    it = live_.end();
  }
  if (it == live_.end()) {
    it = live_.emplace(key, FlowState{}).first;
    ++counters_.flows_opened;
  }
  it->second.add(pkt);
  ++counters_.packets_assigned;

  if (pkt.is_tcp() && (pkt.has_flag(tcp_flag::fin) || pkt.has_flag(tcp_flag::rst))) {
    const auto reason = pkt.has_flag(tcp_flag::rst) ? CloseReason::rst : CloseReason::fin;
    closed.push_back(close(it, reason));
    terminated_[key] = pkt.ts_us;
    terminated_order_.emplace_back(pkt.ts_us, key);
  }
  return closed;
}

namespace {
void sort_by_start(std::vector<ClosedFlow>& flows) {
  std::stable_sort(flows.begin(), flows.end(), [](const ClosedFlow& l, const ClosedFlow& r) {
    if (l.flow.start_ts_us != r.flow.start_ts_us) return l.flow.start_ts_us < r.flow.start_ts_us;
    return l.flow.key < r.flow.key;
  });
}
}  // namespace

std::vector<ClosedFlow> FlowTable::expire_idle(std::int64_t now_us) {
  std::vector<ClosedFlow> out;
  for (auto it = live_.begin(); it != live_.end();) {
    if (now_us - it->second.last_ts_us > timeout_for(it->first.protocol)) {
      auto next = std::next(it);
      out.push_back(close(it, CloseReason::timeout));
      it = next;
    } else {
      ++it;
    }
  }
  sort_by_start(out);
  return out;
}

std::vector<ClosedFlow> FlowTable::flush(std::int64_t now_us) {
  std::vector<ClosedFlow> out;
  out.reserve(live_.size());
  for (auto& [key, state] : live_) {
    const auto reason = now_us - state.last_ts_us > timeout_for(key.protocol) ? CloseReason::timeout
                                                                              : CloseReason::end_of_capture;
    out.push_back(ClosedFlow{std::move(state), reason});
  }
  counters_.flows_closed += live_.size();
  live_.clear();
  sort_by_start(out);
  return out;
}

ExtractionResult extract_flows(std::span<const PacketRecord> packets, const FlowConfig& config) {
  FlowTable table(config);
  ExtractionResult result;
  const std::int64_t sweep_every =
      std::max<std::int64_t>(1, std::min(config.tcp_timeout_us, config.udp_timeout_us) / 4);
  std::int64_t last_sweep = packets.empty() ? 0 : packets.front().ts_us;
  std::int64_t clock = last_sweep;

  auto append = [&result](std::vector<ClosedFlow>&& flows) {
    for (auto& f : flows) result.flows.push_back(std::move(f));
  };
  for (const auto& pkt : packets) {
    append(table.process_packet(pkt));
    clock = std::max(clock, pkt.ts_us);
    if (clock - last_sweep >= sweep_every) {
      append(table.expire_idle(clock));
      last_sweep = clock;
    }
  }
  append(table.flush(clock));
  sort_by_start(result.flows);
  result.counters = table.counters();
  return result;
}

}  // namespace dosml
