#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dosml/error.hpp"

namespace dosml {

namespace tcp_flag {
inline constexpr std::uint8_t fin = 0x01;
inline constexpr std::uint8_t syn = 0x02;
inline constexpr std::uint8_t rst = 0x04;
inline constexpr std::uint8_t psh = 0x08;
inline constexpr std::uint8_t ack = 0x10;
inline constexpr std::uint8_t urg = 0x20;
inline constexpr std::uint8_t ece = 0x40;
inline constexpr std::uint8_t cwr = 0x80;
}  // namespace tcp_flag

inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;

// One IPv4 TCP or UDP packet. header_len covers the IP and transport headers;
// payload_len is the transport payload.
struct PacketRecord {
  std::int64_t ts_us = 0;
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = kProtoTcp;
  std::uint8_t tcp_flags = 0;
  std::uint32_t header_len = 0;
  std::uint32_t payload_len = 0;
  std::uint16_t tcp_window = 0;

  bool has_flag(std::uint8_t f) const noexcept { return (tcp_flags & f) != 0; }
  bool is_tcp() const noexcept { return protocol == kProtoTcp; }

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

struct PcapResult {
  std::vector<PacketRecord> packets;
  std::size_t total_records = 0;
  std::size_t skipped_non_ipv4 = 0;
  std::size_t skipped_protocol = 0;
  std::size_t skipped_fragment = 0;
  std::size_t skipped_malformed = 0;

  std::size_t skipped() const noexcept {
    return skipped_non_ipv4 + skipped_protocol + skipped_fragment + skipped_malformed;
  }
};

// Classic libpcap format, microsecond or nanosecond magic in either byte order,
// Ethernet link type only.
PcapResult parse_pcap(std::span<const std::uint8_t> bytes);
PcapResult read_pcap_file(const std::string& path);

// Line format: ts_us,src_ip,src_port,dst_ip,dst_port,proto,flags,hdr,payload,window
PacketRecord parse_fixture_line(std::string_view line, std::size_t line_no = 1);
// Whole fixture text; blank lines and lines starting with '#' are skipped.
std::vector<PacketRecord> parse_fixture(std::string_view text);
std::string to_fixture_line(const PacketRecord& pkt);

std::string format_ipv4(std::uint32_t addr);
std::optional<std::uint32_t> parse_ipv4(std::string_view text);
// Canonical letter order "FSRPAUEC".
std::string flags_to_string(std::uint8_t flags);

}  // namespace dosml
