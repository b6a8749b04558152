#include "fieldclust/segmentation.hpp"

#include <algorithm>
#include <cstdlib>
#include <iterator>
#include <fstream>
#include <map>

#include <json.hpp>

#include "fieldclust/error.hpp"

namespace fieldclust {

using json = nlohmann::json;

namespace {

Segmentation build_from_fields(std::span<const Message> messages, const json& doc,
                               std::string_view source) {
  std::map<Bytes, std::size_t> by_payload;
  for (const auto& m : messages) by_payload.emplace(m.payload, m.id);

  Segmentation seg;
  seg.segmenter_name = doc.value("segmenter", std::string("import"));
  if (!doc.contains("messages") || !doc["messages"].is_array())
    throw Error(ErrorKind::parse, std::string(source) + ": missing \"messages\" array");

  std::map<std::size_t, std::vector<Segment>> per_message;
  for (const auto& entry : doc["messages"]) {
    std::size_t id = 0;
    std::string key;
    if (entry.contains("payload")) {
      key = entry["payload"].get<std::string>();
      auto bytes = from_hex(key);
      if (!bytes) throw Error(ErrorKind::parse, std::string(source) + ": bad payload hex " + key);
      auto it = by_payload.find(*bytes);
      if (it == by_payload.end())
        throw Error(ErrorKind::missing_message,
                    std::string(source) + ": message " + key + " is not in the trace");
      id = it->second;
    } else if (entry.contains("index")) {
      id = entry["index"].get<std::size_t>();
      key = "#" + std::to_string(id);
      if (id >= messages.size())
        throw Error(ErrorKind::missing_message,
                    std::string(source) + ": message index " + std::to_string(id) + " out of range");
    } else {
      throw Error(ErrorKind::parse, std::string(source) + ": entry lacks \"payload\" or \"index\"");
    }
    if (per_message.count(id))
      throw Error(ErrorKind::inconsistent_ground_truth,
                  std::string(source) + ": duplicate entry for message " + key);

    const auto& payload = messages[id].payload;
    std::vector<Segment> segments;
    std::size_t offset = 0;
    for (const auto& field : entry.at("fields")) {
      auto len = field.at("len").get<long long>();
      if (len < 1 || offset + std::size_t(len) > payload.size())
        throw Error(ErrorKind::inconsistent_ground_truth,
                    std::string(source) + ": field lengths of message " + key +
                        " do not match its payload length " + std::to_string(payload.size()));
      Segment s;
      s.message_id = id;
      s.offset = offset;
      s.length = std::size_t(len);
      s.bytes.assign(payload.begin() + offset, payload.begin() + offset + s.length);
      if (field.contains("type") && !field["type"].is_null()) s.truth_type = field["type"].get<std::string>();
      offset += s.length;
      segments.push_back(std::move(s));
    }
    if (offset != payload.size())
      throw Error(ErrorKind::inconsistent_ground_truth,
                  std::string(source) + ": field lengths of message " + key + " sum to " +
                      std::to_string(offset) + ", payload has " + std::to_string(payload.size()));
    per_message.emplace(id, std::move(segments));
  }

  for (auto& [id, segments] : per_message) {
    seg.covers_messages.insert(id);
    std::move(segments.begin(), segments.end(), std::back_inserter(seg.segments));
  }
  return seg;
}

}  // namespace

Segmentation import_segmentation(std::span<const Message> messages, std::istream& in,
                                 std::string_view source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string(source) + ": " + e.what());
  }
  try {
    return build_from_fields(messages, doc, source);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string(source) + ": " + e.what());
  }
}

Segmentation import_segmentation(std::span<const Message> messages,
                                 const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return import_segmentation(messages, in, path.string());
}

void export_segmentation(std::ostream& out, std::span<const Message> messages,
                         const Segmentation& segmentation) {
  json doc;
  doc["segmenter"] = segmentation.segmenter_name;
  json entries = json::array();
  std::size_t i = 0;
  const auto& segs = segmentation.segments;
  while (i < segs.size()) {
    std::size_t id = segs[i].message_id;
    json fields = json::array();
    for (; i < segs.size() && segs[i].message_id == id; ++i) {
      json f;
      f["len"] = segs[i].length;
      f["type"] = segs[i].truth_type ? json(*segs[i].truth_type) : json(nullptr);
      fields.push_back(std::move(f));
    }
    entries.push_back({{"payload", to_hex(messages[id].payload)}, {"fields", std::move(fields)}});
  }
  doc["messages"] = std::move(entries);
  out << doc.dump(1) << '\n';
}

Texture texture_of(std::uint8_t byte) {
  if (byte == 0x00) return Texture::zero;
  if (byte >= 0x20 && byte <= 0x7e) return Texture::printable;
  return Texture::other;
}

std::vector<std::size_t> heuristic_boundaries(std::span<const std::uint8_t> payload) {
  const std::size_t n = payload.size();
  auto delta = [&](std::size_t i) { return std::abs(int(payload[i]) - int(payload[i - 1])); };

  std::vector<std::size_t> boundaries;
  for (std::size_t i = 1; i < n; ++i) {
    Texture here = texture_of(payload[i]);
    if (texture_of(payload[i - 1]) == here) continue;
    bool lasting = i + 1 < n && texture_of(payload[i + 1]) == here;
    bool delta_turn = i >= 3 && delta(i) - delta(i - 1) > 0 && delta(i - 1) - delta(i - 2) <= 0;
    if (lasting || delta_turn) boundaries.push_back(i);
  }
  return boundaries;
}

Segmentation segment_heuristic(std::span<const Message> messages) {
  Segmentation seg;
  seg.segmenter_name = std::string(kHeuristicSegmenterName);
  for (const auto& m : messages) {
    seg.covers_messages.insert(m.id);
    auto cuts = heuristic_boundaries(m.payload);
    cuts.push_back(m.payload.size());
    std::size_t start = 0;
    for (auto end : cuts) {
      Segment s;
      s.message_id = m.id;
      s.offset = start;
      s.length = end - start;
      s.bytes.assign(m.payload.begin() + start, m.payload.begin() + end);
      seg.segments.push_back(std::move(s));
      start = end;
    }
  }
  return seg;
}

AnalyzableSegments filter_analyzable(const Segmentation& segmentation) {
  AnalyzableSegments out;
  for (const auto& s : segmentation.segments) {
    if (s.length >= 2) {
      out.segments.push_back(s);
    } else {
      ++out.excluded_segments;
      out.excluded_bytes += s.length;
    }
  }
  return out;
}

void assign_truth_labels(Segmentation& inferred, const Segmentation& truth) {
  std::map<std::size_t, std::vector<const Segment*>> truth_by_message;
  for (const auto& t : truth.segments) truth_by_message[t.message_id].push_back(&t);

  for (auto& s : inferred.segments) {
    auto it = truth_by_message.find(s.message_id);
    if (it == truth_by_message.end()) continue;
    std::size_t best_overlap = 0;
    const Segment* best = nullptr;
    for (const Segment* t : it->second) {
      std::size_t lo = std::max(s.offset, t->offset);
      std::size_t hi = std::min(s.offset + s.length, t->offset + t->length);
      std::size_t overlap = hi > lo ? hi - lo : 0;
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = t;
      }
    }
    s.truth_type = best ? best->truth_type : std::nullopt;
  }
}

void check_tiling(std::span<const Message> messages, const Segmentation& segmentation) {
  std::map<std::size_t, std::size_t> next_offset;
  std::size_t prev_message = 0;
  bool first = true;
  for (const auto& s : segmentation.segments) {
    if (s.message_id >= messages.size())
      throw std::invalid_argument("segment references unknown message");
    if (!first && s.message_id < prev_message)
      throw std::invalid_argument("segments not ordered by message id");
    first = false;
    prev_message = s.message_id;
    auto& expected = next_offset[s.message_id];
    const auto& payload = messages[s.message_id].payload;
    if (s.offset != expected || s.length == 0 || s.offset + s.length > payload.size())
      throw std::invalid_argument("segments do not tile message " + std::to_string(s.message_id));
    if (!std::equal(s.bytes.begin(), s.bytes.end(), payload.begin() + s.offset) ||
        s.bytes.size() != s.length)
      throw std::invalid_argument("segment bytes differ from payload slice");
    expected += s.length;
  }
  for (auto [id, end] : next_offset) {
    if (end != messages[id].payload.size())
      throw std::invalid_argument("segments leave a gap at the end of message " + std::to_string(id));
  }
}

}  // namespace fieldclust
