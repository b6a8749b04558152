#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fieldclust/clustering.hpp"
#include "fieldclust/evaluation.hpp"
#include "fieldclust/refinement.hpp"

namespace fieldclust {

struct ReportMetadata {
  std::string protocol;
  std::string input;
  std::string filter;
  std::size_t limit = 0;
  std::string limit_stage = "after-deduplication";
  std::string segmenter;
  std::size_t records = 0;
  std::size_t messages = 0;
  std::size_t total_bytes = 0;
  std::size_t segments = 0;
  std::size_t excluded_segments = 0;  // one-byte segments
  std::size_t excluded_bytes = 0;
  std::size_t unique_values = 0;
  double epsilon = 0.0;
  double knee = 0.0;
  std::size_t chosen_k = 0;
  std::size_t min_samples = 0;
  bool retrimmed = false;
  std::size_t retrim_count = 0;
  bool fallback = false;
  bool retrim_stalled = false;
  bool retrim_capped = false;
  double kneedle_sensitivity = 0.0;
  double spline_smoothing = 0.0;
  double epsilon_shift = 0.0;
  RefinementThresholds thresholds;
  bool refined = true;
  std::string log_rounding = "natural log, rounded half away from zero";
  std::string occurrence_counting = "segments of the de-duplicated trace";
  std::string pair_counting = "unique segment values; tn_plus_fn sums ordered cluster pairs";

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct ReportValue {
  std::string hex;
  std::size_t occurrences = 0;
  std::optional<std::string> type;
  std::vector<std::array<std::size_t, 2>> positions;  // (message id, offset)

  friend bool operator==(const ReportValue&, const ReportValue&) = default;
};

struct ReportCluster {
  std::size_t id = 0;
  ClusterStats stats;
  std::vector<ReportValue> values;

  friend bool operator==(const ReportCluster&, const ReportCluster&) = default;
};

struct AnalysisReport {
  ReportMetadata metadata;
  std::vector<std::string> messages;  // payload hex, indexed by message id
  std::vector<ReportCluster> clusters;
  std::vector<ReportValue> noise;
  std::optional<Metrics> metrics;

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

/// Rounds to six significant digits, the precision of every reported real.
double round6(double value);

std::string report_to_json(const AnalysisReport& report);
AnalysisReport report_from_json(const std::string& text);
AnalysisReport read_report(const std::filesystem::path& path);

/// Aligned text table: protocol, messages, unique fields, epsilon, P, R, F.
void write_table(std::ostream& out, const AnalysisReport& report);

/// Writes whichever of the two paths is non-empty. Throws Error(io).
void emit_report(const AnalysisReport& report, const std::filesystem::path& json_path,
                 const std::filesystem::path& table_path);

}  // namespace fieldclust
