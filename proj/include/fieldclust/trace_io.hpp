#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldclust/hex.hpp"

namespace fieldclust {

enum class LinkType { ethernet, raw_payload };

struct TraceRecord {
  double timestamp = 0.0;  // seconds since epoch (line number for hex input)
  Bytes bytes;             // never empty
};

/// Records in capture order.
struct RawTrace {
  std::string source_path;
  LinkType link_type = LinkType::raw_payload;
  std::vector<TraceRecord> records;
  std::size_t skipped_fragments = 0;
};

struct ProtocolFilter {
  enum class Transport { udp, tcp, raw };

  Transport transport = Transport::raw;
  std::uint16_t port = 0;

  /// Accepts "udp:<port>", "tcp:<port>" or "raw".
  static ProtocolFilter parse(std::string_view text);
  std::string to_string() const;
};

/// A de-duplicated payload. `id` is the position after de-duplication.
struct Message {
  std::size_t id = 0;
  Bytes payload;
  std::size_t origin_record = 0;
};

/// Reads a classic pcap container (either byte order, micro- or nanosecond
/// timestamps). Transport filters unwrap Ethernet, IPv4 and UDP/TCP; IP
/// fragments are skipped and counted. The "raw" filter keeps whole frames.
RawTrace load_pcap(const std::filesystem::path& path, const ProtocolFilter& filter);
RawTrace parse_pcap(std::span<const std::uint8_t> data, const ProtocolFilter& filter,
                    std::string source_path = {});

/// One message per line as hex digits; lines starting with '#' and blank
/// lines are ignored.
RawTrace load_hexlines(const std::filesystem::path& path);
RawTrace parse_hexlines(std::istream& in, std::string source_path = {});

void write_hexlines(std::ostream& out, std::span<const Message> messages);

/// Keeps the first occurrence of every distinct payload, in capture order.
std::vector<Message> deduplicate(const RawTrace& trace);

/// Convenience for re-running de-duplication on already prepared messages.
std::vector<Message> deduplicate(std::span<const Message> messages);

/// Drops everything past the first `limit` messages (limit 0 keeps all).
std::vector<Message> truncate(std::vector<Message> messages, std::size_t limit);

std::size_t total_bytes(std::span<const Message> messages);

}  // namespace fieldclust
