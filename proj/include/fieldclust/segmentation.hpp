#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldclust/hex.hpp"
#include "fieldclust/trace_io.hpp"

namespace fieldclust {

/// A field candidate: payload[offset, offset + length) of one message.
struct Segment {
  std::size_t message_id = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
  Bytes bytes;
  std::optional<std::string> truth_type;  // evaluation only

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Segments ordered by message id, then offset. Each covered message is
/// tiled without gaps or overlaps.
struct Segmentation {
  std::vector<Segment> segments;
  std::string segmenter_name;
  std::set<std::size_t> covers_messages;

  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

inline constexpr std::string_view kHeuristicSegmenterName = "delta-texture-v1";

/// Reads the segmentation JSON format:
///   {"segmenter": str, "messages": [{"payload": hex | "index": int,
///                                    "fields": [{"len": int, "type": str|null}]}]}
Segmentation import_segmentation(std::span<const Message> messages,
                                 const std::filesystem::path& path);
Segmentation import_segmentation(std::span<const Message> messages, std::istream& in,
                                 std::string_view source = "segments");

/// Writes `segmentation` in the same format, keyed by payload hex.
void export_segmentation(std::ostream& out, std::span<const Message> messages,
                         const Segmentation& segmentation);

// Texture classes used by the built-in segmenter.
enum class Texture { zero, printable, other };
Texture texture_of(std::uint8_t byte);

/// Built-in boundary heuristic ("delta-texture-v1"). A boundary is placed
/// before position i when
///   - the byte texture changes at i and the new texture holds for at least
///     two bytes, or
///   - the texture changes at i and the delta series |p[i] - p[i-1]| turns
///     from non-increasing to increasing at i.
std::vector<std::size_t> heuristic_boundaries(std::span<const std::uint8_t> payload);
Segmentation segment_heuristic(std::span<const Message> messages);

struct AnalyzableSegments {
  std::vector<Segment> segments;  // length >= 2
  std::size_t excluded_segments = 0;
  std::size_t excluded_bytes = 0;
};

/// Drops one-byte segments, keeping a tally for coverage accounting.
AnalyzableSegments filter_analyzable(const Segmentation& segmentation);

/// Labels every segment of `inferred` with the type of the ground-truth field
/// that overlaps it the most (earlier field on ties). Segments of messages the
/// truth does not cover stay unlabeled.
void assign_truth_labels(Segmentation& inferred, const Segmentation& truth);

/// Throws std::invalid_argument if `segmentation` violates the ordering or
/// tiling invariants for `messages`.
void check_tiling(std::span<const Message> messages, const Segmentation& segmentation);

}  // namespace fieldclust
