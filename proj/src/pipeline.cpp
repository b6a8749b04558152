#include "fieldclust/pipeline.hpp"

#include <fstream>
#include <iostream>
#include <map>

#include "fieldclust/error.hpp"
#include "fieldclust/evaluation.hpp"

namespace fieldclust {

namespace {

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

bool fully_labeled(std::span<const Segment> segments) {
  if (segments.empty()) return false;
  for (const auto& s : segments)
    if (!s.truth_type) return false;
  return true;
}

ReportValue report_value(const SegmentValue& value, std::span<const Segment> segments,
                         const std::vector<std::string>* labels, std::size_t index) {
  ReportValue rv;
  rv.hex = to_hex(value.bytes);
  rv.occurrences = value.members.size();
  if (labels) rv.type = (*labels)[index];
  for (auto m : value.members) rv.positions.push_back({segments[m].message_id, segments[m].offset});
  return rv;
}

}  // namespace

PipelineResult prepare(const PipelineConfig& config) {
  PipelineResult r;

  stage("preprocess", [&] {
    RawTrace trace = config.format == InputFormat::pcap ? load_pcap(config.input, config.filter)
                                                        : load_hexlines(config.input);
    r.records = trace.records.size();
    r.messages = truncate(deduplicate(trace), config.limit);
  });

  stage("segmentation", [&] {
    if (config.segmenter == SegmenterChoice::import) {
      if (config.segments.empty())
        throw Error(ErrorKind::io, "the import segmenter needs a segmentation file");
      r.segmentation = import_segmentation(r.messages, config.segments);
    } else {
      r.segmentation = segment_heuristic(r.messages);
      if (!config.segments.empty())
        assign_truth_labels(r.segmentation, import_segmentation(r.messages, config.segments));
    }
    if (!config.dump_segments.empty()) {
      auto out = open_out(config.dump_segments);
      export_segmentation(out, r.messages, r.segmentation);
    }
  });

  stage("dissimilarity", [&] {
    r.analyzable = filter_analyzable(r.segmentation);
    r.values = unique_values(r.analyzable.segments);
    if (r.values.size() < kMinUniqueValues)
      throw Error(ErrorKind::empty_analysis,
                  "only " + std::to_string(r.values.size()) +
                      " unique multi-byte segment values; at least 8 are needed");
    r.matrix = build_matrix(r.values, config.threads);
    if (!config.dump_matrix.empty()) {
      auto out = open_out(config.dump_matrix);
      write_matrix_csv(out, r.matrix);
    }
  });

  stage("autoconf", [&] {
    r.selection = select_epsilon(r.matrix, config.autoconf);
    if (!config.dump_ecdf.empty()) {
      auto out = open_out(config.dump_ecdf);
      write_ecdf_csv(out, r.selection.curves);
    }
  });
  return r;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult r = prepare(config);

  stage("clustering", [&] { r.clustering = cluster_with_retrim(r.matrix, r.selection.config); });

  stage("refinement", [&] {
    if (!config.refine) return;
    std::vector<std::size_t> occurrences;
    for (const auto& v : r.values) occurrences.push_back(v.members.size());
    r.clustering = merge_pass(r.matrix, std::move(r.clustering), config.thresholds);
    r.clustering = split_pass(std::move(r.clustering), occurrences, config.thresholds);
  });

  std::optional<std::vector<std::string>> labels;
  stage("evaluation", [&] {
    if (config.evaluate && fully_labeled(r.analyzable.segments)) {
      labels = value_labels(r.values, r.analyzable.segments);
    } else if (config.evaluate && !config.segments.empty()) {
      std::clog << "warning: ground truth does not label every segment; skipping evaluation\n";
    }
  });

  auto& rep = r.report;
  auto& md = rep.metadata;
  const auto& cfg = r.clustering.params;
  md.protocol = config.protocol.empty() ? config.input.stem().string() : config.protocol;
  md.input = config.input.string();
  md.filter = config.format == InputFormat::pcap ? config.filter.to_string() : "hex";
  md.limit = config.limit;
  md.segmenter = r.segmentation.segmenter_name;
  md.records = r.records;
  md.messages = r.messages.size();
  md.total_bytes = total_bytes(r.messages);
  md.segments = r.segmentation.segments.size();
  md.excluded_segments = r.analyzable.excluded_segments;
  md.excluded_bytes = r.analyzable.excluded_bytes;
  md.unique_values = r.values.size();
  md.epsilon = round6(cfg.epsilon);
  md.knee = round6(cfg.knee_x);
  md.chosen_k = cfg.chosen_k;
  md.min_samples = cfg.min_samples;
  md.retrimmed = cfg.retrimmed;
  md.retrim_count = cfg.retrim_count;
  md.fallback = cfg.fallback;
  md.retrim_stalled = cfg.retrim_stalled;
  md.retrim_capped = cfg.retrim_capped;
  md.kneedle_sensitivity = round6(cfg.sensitivity);
  md.spline_smoothing = round6(cfg.smoothing);
  md.epsilon_shift = round6(cfg.epsilon_shift);
  md.thresholds = config.thresholds;
  md.refined = config.refine;

  for (const auto& m : r.messages) rep.messages.push_back(to_hex(m.payload));
  const auto* label_ptr = labels ? &*labels : nullptr;
  for (const auto& c : r.clustering.clusters) {
    ReportCluster rc;
    rc.id = c.id;
    rc.stats = cluster_stats(r.matrix, c);
    rc.stats.mean_pairwise = round6(rc.stats.mean_pairwise);
    rc.stats.minmed = round6(rc.stats.minmed);
    rc.stats.d_max = round6(rc.stats.d_max);
    for (auto v : c.members) rc.values.push_back(report_value(r.values[v], r.analyzable.segments, label_ptr, v));
    rep.clusters.push_back(std::move(rc));
  }
  for (auto v : r.clustering.noise)
    rep.noise.push_back(report_value(r.values[v], r.analyzable.segments, label_ptr, v));

  if (labels) {
    Metrics m = evaluate(r.clustering, *labels, coverage(r.messages, r.values, r.clustering));
    std::clog << "info: tn = tn_plus_fn - fn = "
              << (static_cast<long long>(m.tn_plus_fn) - static_cast<long long>(m.fn)) << '\n';
    m.precision = round6(m.precision);
    m.recall = round6(m.recall);
    m.f_score = round6(m.f_score);
    m.coverage = round6(m.coverage);
    rep.metrics = m;
  }

  stage("report", [&] { emit_report(rep, config.out_json, config.out_table); });
  return r;
}

Metrics evaluate_report(const AnalysisReport& report, const std::filesystem::path& truth_path) {
  return stage("evaluate", [&] {
    std::vector<Message> messages;
    for (const auto& hex : report.messages) {
      auto bytes = from_hex(hex);
      if (!bytes) throw Error(ErrorKind::parse, "report carries invalid message hex");
      messages.push_back({messages.size(), std::move(*bytes), messages.size()});
    }
    Segmentation truth = import_segmentation(messages, truth_path);
    std::map<std::size_t, std::vector<const Segment*>> by_message;
    for (const auto& s : truth.segments) by_message[s.message_id].push_back(&s);

    // Rebuild values, their segments and the clustering from the report.
    std::vector<SegmentValue> values;
    std::vector<Segment> segments;
    Clustering clustering;
    auto add_value = [&](const ReportValue& rv) {
      auto bytes = from_hex(rv.hex);
      if (!bytes) throw Error(ErrorKind::parse, "report carries invalid value hex");
      SegmentValue value{*bytes, {}};
      for (auto [msg, offset] : rv.positions) {
        if (msg >= messages.size()) throw Error(ErrorKind::missing_message, "report position out of range");
        Segment s{msg, offset, bytes->size(), *bytes, std::nullopt};
        Segmentation one;
        one.segments.push_back(s);
        Segmentation relevant;
        for (const auto* t : by_message[msg]) relevant.segments.push_back(*t);
        assign_truth_labels(one, relevant);
        value.members.push_back(segments.size());
        segments.push_back(std::move(one.segments.front()));
      }
      values.push_back(std::move(value));
      return values.size() - 1;
    };
    for (const auto& rc : report.clusters) {
      Cluster c{rc.id, {}};
      for (const auto& rv : rc.values) c.members.push_back(add_value(rv));
      clustering.clusters.push_back(std::move(c));
    }
    for (const auto& rv : report.noise) clustering.noise.push_back(add_value(rv));

    auto labels = value_labels(values, segments);
    Metrics m = evaluate(clustering, labels, coverage(messages, values, clustering));
    m.precision = round6(m.precision);
    m.recall = round6(m.recall);
    m.f_score = round6(m.f_score);
    m.coverage = round6(m.coverage);
    return m;
  });
}

}  // namespace fieldclust
