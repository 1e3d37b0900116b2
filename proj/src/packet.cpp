#include "dosml/packet.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iterator>

namespace dosml {

namespace {

constexpr std::size_t kGlobalHeaderLen = 24;
constexpr std::size_t kRecordHeaderLen = 16;
constexpr std::size_t kEthernetHeaderLen = 14;
constexpr std::uint32_t kLinkTypeEthernet = 1;
constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;

struct ByteReader {
  std::span<const std::uint8_t> bytes;
  bool big_endian = false;

  std::uint32_t u32(std::size_t off) const {
    const auto* p = bytes.data() + off;
    if (big_endian) {
      return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
             (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
    }
    return (std::uint32_t{p[3]} << 24) | (std::uint32_t{p[2]} << 16) |
           (std::uint32_t{p[1]} << 8) | std::uint32_t{p[0]};
  }
};

// Network byte order helpers for packet contents.
std::uint16_t be16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}
std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

enum class Decode { ok, non_ipv4, protocol, fragment, malformed };

Decode decode_frame(std::span<const std::uint8_t> frame, PacketRecord& out) {
  if (frame.size() < kEthernetHeaderLen) return Decode::malformed;
  if (be16(frame.data() + 12) != kEtherTypeIpv4) return Decode::non_ipv4;

  auto ip = frame.subspan(kEthernetHeaderLen);
  if (ip.size() < 20) return Decode::malformed;
  if ((ip[0] >> 4) != 4) return Decode::non_ipv4;
  const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
  if (ihl < 20 || ip.size() < ihl) return Decode::malformed;
  const std::size_t total_len = be16(ip.data() + 2);
  if (total_len < ihl) return Decode::malformed;
  const std::uint16_t frag = be16(ip.data() + 6);
  const std::uint8_t proto = ip[9];
  if (proto != kProtoTcp && proto != kProtoUdp) return Decode::protocol;
  if ((frag & 0x1FFF) != 0) return Decode::fragment;

  out.src_ip = be32(ip.data() + 12);
  out.dst_ip = be32(ip.data() + 16);
  out.protocol = proto;

  auto l4 = ip.subspan(ihl);
  std::size_t l4_len = 0;
  if (proto == kProtoTcp) {
    if (l4.size() < 20) return Decode::malformed;
    l4_len = static_cast<std::size_t>(l4[12] >> 4) * 4;
    if (l4_len < 20) return Decode::malformed;
    out.tcp_flags = l4[13];
    out.tcp_window = be16(l4.data() + 14);
  } else {
    if (l4.size() < 8) return Decode::malformed;
    l4_len = 8;
    out.tcp_flags = 0;
    out.tcp_window = 0;
  }
  if (ihl + l4_len > total_len) return Decode::malformed;
  out.src_port = be16(l4.data());
  out.dst_port = be16(l4.data() + 2);
  out.header_len = static_cast<std::uint32_t>(ihl + l4_len);
  out.payload_len = static_cast<std::uint32_t>(total_len - ihl - l4_len);
  return Decode::ok;
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

PcapResult parse_pcap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGlobalHeaderLen) {
    if (bytes.size() >= 4) {
      ByteReader probe{bytes, false};
      const auto m = probe.u32(0);
      if (m != 0xA1B2C3D4 && m != 0xA1B23C4D && m != 0xD4C3B2A1 && m != 0x4D3CB2A1) {
        throw UnsupportedFormat("unrecognised pcap magic");
      }
    }
    throw TruncatedCapture("truncated pcap global header", bytes.size());
  }

  ByteReader rd{bytes, false};
  bool nanos = false;
  switch (rd.u32(0)) {
    case 0xA1B2C3D4: break;
    case 0xA1B23C4D: nanos = true; break;
    case 0xD4C3B2A1: rd.big_endian = true; break;
    case 0x4D3CB2A1: rd.big_endian = true; nanos = true; break;
    default: throw UnsupportedFormat("unrecognised pcap magic");
  }
  if (rd.u32(20) != kLinkTypeEthernet) {
    throw UnsupportedFormat("unsupported link type " + std::to_string(rd.u32(20)));
  }

  PcapResult result;
  std::size_t off = kGlobalHeaderLen;
  while (off < bytes.size()) {
    if (bytes.size() - off < kRecordHeaderLen) {
      throw TruncatedCapture("truncated record header", off);
    }
    const std::int64_t sec = rd.u32(off);
    const std::int64_t frac = rd.u32(off + 4);
    const std::size_t incl_len = rd.u32(off + 8);
    if (bytes.size() - off - kRecordHeaderLen < incl_len) {
      throw TruncatedCapture("truncated record body", off);
    }
    ++result.total_records;

    PacketRecord pkt;
    pkt.ts_us = sec * 1'000'000 + (nanos ? frac / 1000 : frac);
    switch (decode_frame(bytes.subspan(off + kRecordHeaderLen, incl_len), pkt)) {
      case Decode::ok: result.packets.push_back(pkt); break;
      case Decode::non_ipv4: ++result.skipped_non_ipv4; break;
      case Decode::protocol: ++result.skipped_protocol; break;
      case Decode::fragment: ++result.skipped_fragment; break;
      case Decode::malformed: ++result.skipped_malformed; break;
    }
    off += kRecordHeaderLen + incl_len;
  }
  return result;
}

PcapResult read_pcap_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open capture " + path);
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_pcap(bytes);
}

std::string format_ipv4(std::uint32_t addr) {
  return std::to_string(addr >> 24) + '.' + std::to_string((addr >> 16) & 0xFF) + '.' +
         std::to_string((addr >> 8) & 0xFF) + '.' + std::to_string(addr & 0xFF);
}

std::optional<std::uint32_t> parse_ipv4(std::string_view text) {
  std::uint32_t addr = 0;
  for (int i = 0; i < 4; ++i) {
    const auto dot = text.find('.');
    const bool last = i == 3;
    if (last != (dot == std::string_view::npos)) return std::nullopt;
    const auto part = last ? text : text.substr(0, dot);
    unsigned octet = 0;
    if (part.size() > 3 || !parse_uint(part, octet) || octet > 255) return std::nullopt;
    addr = (addr << 8) | octet;
    if (!last) text.remove_prefix(dot + 1);
  }
  return addr;
}

std::string flags_to_string(std::uint8_t flags) {
  static constexpr std::array<std::pair<std::uint8_t, char>, 8> kOrder{{
      {tcp_flag::fin, 'F'}, {tcp_flag::syn, 'S'}, {tcp_flag::rst, 'R'}, {tcp_flag::psh, 'P'},
      {tcp_flag::ack, 'A'}, {tcp_flag::urg, 'U'}, {tcp_flag::ece, 'E'}, {tcp_flag::cwr, 'C'},
  }};
  std::string out;
  for (auto [bit, letter] : kOrder) {
    if (flags & bit) out.push_back(letter);
  }
  return out;
}

PacketRecord parse_fixture_line(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::array<std::string_view, 10> f;
  std::size_t n = 0;
  while (true) {
    const auto comma = line.find(',');
    if (n == f.size()) throw FixtureParseError("expected 10 fields, got more", line_no);
    f[n++] = line.substr(0, comma);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  if (n != f.size()) {
    throw FixtureParseError("expected 10 fields, got " + std::to_string(n), line_no);
  }

  auto number = [&](std::string_view s, auto& out, const char* what) {
    if (!parse_uint(s, out)) {
      throw FixtureParseError(std::string("bad ") + what + " '" + std::string(s) + "'", line_no);
    }
  };
  auto address = [&](std::string_view s) {
    auto a = parse_ipv4(s);
    if (!a) throw FixtureParseError("bad IPv4 address '" + std::string(s) + "'", line_no);
    return *a;
  };

  PacketRecord pkt;
  std::uint64_t ts = 0;
  number(f[0], ts, "timestamp");
  pkt.ts_us = static_cast<std::int64_t>(ts);
  pkt.src_ip = address(f[1]);
  number(f[2], pkt.src_port, "source port");
  pkt.dst_ip = address(f[3]);
  number(f[4], pkt.dst_port, "destination port");
  unsigned proto = 0;
  number(f[5], proto, "protocol");
  if (proto != kProtoTcp && proto != kProtoUdp) {
    throw FixtureParseError("protocol " + std::to_string(proto) + " is not TCP or UDP", line_no);
  }
  pkt.protocol = static_cast<std::uint8_t>(proto);
  for (char c : f[6]) {
    switch (c) {
      case 'F': pkt.tcp_flags |= tcp_flag::fin; break;
      case 'S': pkt.tcp_flags |= tcp_flag::syn; break;
      case 'R': pkt.tcp_flags |= tcp_flag::rst; break;
      case 'P': pkt.tcp_flags |= tcp_flag::psh; break;
      case 'A': pkt.tcp_flags |= tcp_flag::ack; break;
      case 'U': pkt.tcp_flags |= tcp_flag::urg; break;
      case 'E': pkt.tcp_flags |= tcp_flag::ece; break;
      case 'C': pkt.tcp_flags |= tcp_flag::cwr; break;
      default: throw FixtureParseError(std::string("unknown flag letter '") + c + "'", line_no);
    }
  }
  number(f[7], pkt.header_len, "header length");
  number(f[8], pkt.payload_len, "payload length");
  number(f[9], pkt.tcp_window, "window");
  if (pkt.protocol == kProtoUdp && (pkt.tcp_flags != 0 || pkt.tcp_window != 0)) {
    throw FixtureParseError("UDP record carries TCP flags or window", line_no);
  }
  return pkt;
}

std::vector<PacketRecord> parse_fixture(std::string_view text) {
  std::vector<PacketRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;
    out.push_back(parse_fixture_line(line, line_no));
  }
  return out;
}

std::string to_fixture_line(const PacketRecord& pkt) {
  std::string s;
  s += std::to_string(pkt.ts_us);
  s += ',' + format_ipv4(pkt.src_ip) + ',' + std::to_string(pkt.src_port);
  s += ',' + format_ipv4(pkt.dst_ip) + ',' + std::to_string(pkt.dst_port);
  s += ',' + std::to_string(pkt.protocol) + ',' + flags_to_string(pkt.tcp_flags);
  s += ',' + std::to_string(pkt.header_len) + ',' + std::to_string(pkt.payload_len);
  s += ',' + std::to_string(pkt.tcp_window);
  return s;
}

}  // namespace dosml
