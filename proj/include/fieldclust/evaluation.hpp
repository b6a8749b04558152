#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldclust/clustering.hpp"
#include "fieldclust/dissimilarity.hpp"
#include "fieldclust/segmentation.hpp"
#include "fieldclust/trace_io.hpp"

namespace fieldclust {

/// counts[i][l]: unique segments of type l in cluster i; noise[l] and
/// totals[l] likewise for the noise set and the whole analysis.
struct ContingencyTable {
  std::vector<std::string> types;
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::uint64_t> noise;
  std::vector<std::uint64_t> totals;
};

struct Metrics {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn_plus_fn = 0;
  std::uint64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  double beta = 0.25;
  double coverage = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct PositivesNegatives {
  std::uint64_t tp_plus_fp = 0;
  std::uint64_t tn_plus_fn = 0;  // ordered cluster pairs, as in the metric's definition
};

inline constexpr double kDefaultBeta = 0.25;

/// Majority truth label over each value's member segments (first seen label
/// wins ties). Throws Error(evaluation_unavailable) if any member is unlabeled.
std::vector<std::string> value_labels(std::span<const SegmentValue> values,
                                      std::span<const Segment> segments);

ContingencyTable contingency(const Clustering& clustering, std::span<const std::string> labels);

PositivesNegatives positives_negatives(std::span<const Cluster> clusters);

/// Sum over clusters and types of C(t_il, 2).
std::uint64_t true_positives(const ContingencyTable& table);

/// Missed same-type pairs: across clusters, inside the noise and between
/// noise and clusters.
std::uint64_t false_negatives(const ContingencyTable& table);

/// (1 + b^2) p r / (b^2 p + r); 0 when p = r = 0.
double f_beta(double p, double r, double beta);

/// Bytes of clustered segment instances over all message bytes.
double coverage(std::span<const Message> messages, std::span<const SegmentValue> values,
                const Clustering& clustering);

Metrics evaluate(const Clustering& clustering, std::span<const std::string> labels,
                 double coverage_ratio, double beta = kDefaultBeta);

}  // namespace fieldclust
