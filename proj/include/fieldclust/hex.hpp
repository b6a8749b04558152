#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fieldclust {

using Bytes = std::vector<std::uint8_t>;

/// Lowercase hex, two digits per byte, no separators.
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Parses an even-length run of hex digits (either case). Returns nullopt on
/// odd length or a non-hex character.
std::optional<Bytes> from_hex(std::string_view text);

}  // namespace fieldclust
