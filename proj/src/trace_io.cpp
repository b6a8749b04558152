#include "fieldclust/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>

#include "fieldclust/error.hpp"

namespace fieldclust {

namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::size_t kGlobalHeaderLen = 24;
constexpr std::size_t kRecordHeaderLen = 16;

constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
constexpr std::uint8_t kIpProtoTcp = 6;
constexpr std::uint8_t kIpProtoUdp = 17;

class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, bool swapped) : data_(data), swapped_(swapped) {}

  std::uint32_t u32(std::size_t off) const {
    std::uint32_t v = std::uint32_t(data_[off]) | std::uint32_t(data_[off + 1]) << 8 |
                      std::uint32_t(data_[off + 2]) << 16 | std::uint32_t(data_[off + 3]) << 24;
    if (swapped_) v = __builtin_bswap32(v);
    return v;
  }

 private:
  std::span<const std::uint8_t> data_;
  bool swapped_;
};

std::uint16_t be16(std::span<const std::uint8_t> p, std::size_t off) {
  return static_cast<std::uint16_t>(p[off] << 8 | p[off + 1]);
}

// Returns the transport payload of an Ethernet frame, or an empty span when
// the frame does not match. Sets `fragment` for fragmented IPv4 packets.
std::span<const std::uint8_t> unwrap_ethernet(std::span<const std::uint8_t> frame,
                                              const ProtocolFilter& filter, bool& fragment) {
  fragment = false;
  if (frame.size() < 14 || be16(frame, 12) != kEtherTypeIpv4) return {};
  auto ip = frame.subspan(14);
  if (ip.size() < 20 || (ip[0] >> 4) != 4) return {};
  std::size_t ihl = std::size_t(ip[0] & 0x0f) * 4;
  std::size_t total_len = be16(ip, 2);
  if (ihl < 20 || ip.size() < ihl) return {};
  std::uint16_t flags_frag = be16(ip, 6);
  bool more_fragments = (flags_frag & 0x2000) != 0;
  std::uint16_t frag_offset = flags_frag & 0x1fff;
  if (more_fragments || frag_offset != 0) {
    fragment = true;
    return {};
  }
  if (total_len >= ihl && total_len < ip.size()) ip = ip.first(total_len);  // strip Ethernet padding
  std::uint8_t proto = ip[9];
  auto l4 = ip.subspan(ihl);

  if (filter.transport == ProtocolFilter::Transport::udp) {
    if (proto != kIpProtoUdp || l4.size() < 8) return {};
    if (be16(l4, 0) != filter.port && be16(l4, 2) != filter.port) return {};
    std::size_t udp_len = be16(l4, 4);
    auto payload = l4.subspan(8);
    if (udp_len >= 8 && udp_len - 8 < payload.size()) payload = payload.first(udp_len - 8);
    return payload;
  }
  if (proto != kIpProtoTcp || l4.size() < 20) return {};
  if (be16(l4, 0) != filter.port && be16(l4, 2) != filter.port) return {};
  std::size_t data_offset = std::size_t(l4[12] >> 4) * 4;
  if (data_offset < 20 || data_offset > l4.size()) return {};
  return l4.subspan(data_offset);
}

}  // namespace

ProtocolFilter ProtocolFilter::parse(std::string_view text) {
  if (text == "raw") return {};
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("filter must be udp:<port>, tcp:<port> or raw: " + std::string(text));
  auto proto = text.substr(0, colon);
  auto port_text = text.substr(colon + 1);
  ProtocolFilter filter;
  if (proto == "udp") {
    filter.transport = Transport::udp;
  } else if (proto == "tcp") {
    filter.transport = Transport::tcp;
  } else {
    throw std::invalid_argument("unknown transport in filter: " + std::string(text));
  }
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535)
    throw std::invalid_argument("bad port in filter: " + std::string(text));
  filter.port = static_cast<std::uint16_t>(port);
  return filter;
}

std::string ProtocolFilter::to_string() const {
  switch (transport) {
    case Transport::udp: return "udp:" + std::to_string(port);
    case Transport::tcp: return "tcp:" + std::to_string(port);
    case Transport::raw: return "raw";
  }
  return "raw";
}

RawTrace parse_pcap(std::span<const std::uint8_t> data, const ProtocolFilter& filter,
                    std::string source_path) {
  if (data.size() < kGlobalHeaderLen)
    throw Error(ErrorKind::format, source_path + ": truncated pcap global header");

  std::uint32_t magic_le = Reader(data, false).u32(0);
  bool swapped = false;
  bool nanos = false;
  if (magic_le == kMagicMicro || magic_le == kMagicNano) {
    nanos = magic_le == kMagicNano;
  } else if (__builtin_bswap32(magic_le) == kMagicMicro || __builtin_bswap32(magic_le) == kMagicNano) {
    swapped = true;
    nanos = __builtin_bswap32(magic_le) == kMagicNano;
  } else {
    throw Error(ErrorKind::format, source_path + ": not a classic pcap file (bad magic)");
  }
  Reader reader(data, swapped);
  std::uint32_t network = reader.u32(20);

  RawTrace trace;
  trace.source_path = std::move(source_path);
  if (filter.transport == ProtocolFilter::Transport::raw) {
    trace.link_type = LinkType::raw_payload;
  } else if (network == kLinkEthernet) {
    trace.link_type = LinkType::ethernet;
  } else {
    throw Error(ErrorKind::unsupported,
                trace.source_path + ": unsupported link type " + std::to_string(network));
  }

  std::size_t off = kGlobalHeaderLen;
  while (off < data.size()) {
    if (data.size() - off < kRecordHeaderLen)
      throw Error(ErrorKind::format, trace.source_path + ": truncated pcap record header");
    std::uint32_t ts_sec = reader.u32(off);
    std::uint32_t ts_frac = reader.u32(off + 4);
    std::uint32_t incl_len = reader.u32(off + 8);
    off += kRecordHeaderLen;
    if (data.size() - off < incl_len)
      throw Error(ErrorKind::format, trace.source_path + ": truncated pcap record data");
    auto frame = data.subspan(off, incl_len);
    off += incl_len;

    std::span<const std::uint8_t> payload;
    if (filter.transport == ProtocolFilter::Transport::raw) {
      payload = frame;
    } else {
      bool fragment = false;
      payload = unwrap_ethernet(frame, filter, fragment);
      if (fragment) ++trace.skipped_fragments;
    }
    if (payload.empty()) continue;
    double ts = double(ts_sec) + double(ts_frac) / (nanos ? 1e9 : 1e6);
    trace.records.push_back({ts, Bytes(payload.begin(), payload.end())});
  }

  if (trace.skipped_fragments > 0)
    std::clog << "warning: " << trace.source_path << ": skipped " << trace.skipped_fragments
              << " fragmented IPv4 packet(s)\n";
  if (trace.records.empty())
    throw Error(ErrorKind::empty_trace,
                trace.source_path + ": no packets match filter " + filter.to_string());
  return trace;
}

RawTrace load_pcap(const std::filesystem::path& path, const ProtocolFilter& filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pcap(data, filter, path.string());
}

RawTrace parse_hexlines(std::istream& in, std::string source_path) {
  RawTrace trace;
  trace.source_path = std::move(source_path);
  trace.link_type = LinkType::raw_payload;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string_view digits(line.data() + first, last - first + 1);
    auto bytes = from_hex(digits);
    if (!bytes) {
      throw Error(ErrorKind::parse, trace.source_path + ":" + std::to_string(line_no) +
                                        ": expected an even number of hex digits");
    }
    trace.records.push_back({double(line_no), std::move(*bytes)});
  }
  if (trace.records.empty())
    throw Error(ErrorKind::empty_trace, trace.source_path + ": no messages");
  return trace;
}

RawTrace load_hexlines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_hexlines(in, path.string());
}

void write_hexlines(std::ostream& out, std::span<const Message> messages) {
  for (const auto& m : messages) out << to_hex(m.payload) << '\n';
}

std::vector<Message> deduplicate(const RawTrace& trace) {
  std::vector<Message> messages;
  std::set<Bytes> seen;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& bytes = trace.records[i].bytes;
    if (!seen.insert(bytes).second) continue;
    messages.push_back({messages.size(), bytes, i});
  }
  return messages;
}

std::vector<Message> deduplicate(std::span<const Message> messages) {
  std::vector<Message> out;
  std::set<Bytes> seen;
  for (const auto& m : messages) {
    if (!seen.insert(m.payload).second) continue;
    out.push_back({out.size(), m.payload, m.origin_record});
  }
  return out;
}

std::vector<Message> truncate(std::vector<Message> messages, std::size_t limit) {
  if (limit > 0 && messages.size() > limit) messages.resize(limit);
  return messages;
}

std::size_t total_bytes(std::span<const Message> messages) {
  std::size_t n = 0;
  for (const auto& m : messages) n += m.payload.size();
  return n;
}

}  // namespace fieldclust
