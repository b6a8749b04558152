#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "fieldclust/autoconf.hpp"
#include "fieldclust/clustering.hpp"
#include "fieldclust/dissimilarity.hpp"
#include "fieldclust/refinement.hpp"
#include "fieldclust/report.hpp"
#include "fieldclust/segmentation.hpp"
#include "fieldclust/trace_io.hpp"

namespace fieldclust {

enum class InputFormat { pcap, hex };
enum class SegmenterChoice { heuristic, import };

struct PipelineConfig {
  std::filesystem::path input;
  InputFormat format = InputFormat::hex;
  ProtocolFilter filter;
  std::size_t limit = 0;  // 0 keeps every message
  std::string protocol;   // display name; defaults to the input file stem

  SegmenterChoice segmenter = SegmenterChoice::heuristic;
  // Segmentation to import; with the heuristic segmenter it serves as ground
  // truth for labeling.
  std::filesystem::path segments;

  RefinementThresholds thresholds;
  AutoConfigOptions autoconf;
  bool refine = true;
  bool evaluate = true;

  std::filesystem::path dump_matrix;
  std::filesystem::path dump_ecdf;
  std::filesystem::path dump_segments;
  std::filesystem::path out_json;
  std::filesystem::path out_table;

  unsigned threads = 1;
  std::uint64_t seed = 0;  // fixtures only; the pipeline has no randomness
};

/// Every intermediate artifact of one run.
struct PipelineResult {
  std::size_t records = 0;
  std::vector<Message> messages;
  Segmentation segmentation;
  AnalyzableSegments analyzable;
  std::vector<SegmentValue> values;
  DissimilarityMatrix matrix;
  EpsilonSelection selection;
  Clustering clustering;
  AnalysisReport report;
};

inline constexpr std::size_t kMinUniqueValues = 8;
inline constexpr int kExitEmptyAnalysis = 2;

/// Preprocessing through epsilon selection only.
PipelineResult prepare(const PipelineConfig& config);

/// Full run: preprocess, segment, dissimilarity, auto-configure, cluster,
/// refine, evaluate. Errors carry the failing stage name.
PipelineResult run_pipeline(const PipelineConfig& config);

inline AnalysisReport run(const PipelineConfig& config) { return run_pipeline(config).report; }

/// Scores a report against a ground-truth segmentation of its messages.
Metrics evaluate_report(const AnalysisReport& report, const std::filesystem::path& truth);

}  // namespace fieldclust
