#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "fieldclust/clustering.hpp"
#include "fieldclust/dissimilarity.hpp"

namespace fieldclust {

struct RefinementThresholds {
  double eps_rho_threshold = 0.01;
  double neighbor_density_threshold = 0.002;
  double split_percentile = 95.0;

  friend bool operator==(const RefinementThresholds&, const RefinementThresholds&) = default;
};

/// The closest cross pair between two clusters. link_ij lies in the first
/// cluster, link_ji in the second.
struct LinkPair {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t link_ij = 0;
  std::size_t link_ji = 0;
  double d_link = 0.0;
};

/// Exact argmin over all cross pairs; ties go to the lowest index pair.
LinkPair link_segments(const DissimilarityMatrix& matrix, const Cluster& ci, const Cluster& cj);

/// Median dissimilarity from `link` to the other members of `cluster` lying
/// within `eps`; nullopt when there are none.
std::optional<double> eps_density(const DissimilarityMatrix& matrix, const Cluster& cluster,
                                  std::size_t link, double eps);

/// Very close clusters with similar densities around their link segments.
bool condition1(const DissimilarityMatrix& matrix, const Cluster& ci, const Cluster& cj,
                const RefinementThresholds& thresholds);

/// Somewhat close clusters with similar whole-cluster densities (minmed).
bool condition2(const DissimilarityMatrix& matrix, const Cluster& ci, const Cluster& cj,
                const RefinementThresholds& thresholds);

/// Merges the first qualifying pair (ascending ids) until none qualifies.
Clustering merge_pass(const DissimilarityMatrix& matrix, Clustering clustering,
                      const RefinementThresholds& thresholds);

/// Percentage of `counts` strictly below `pivot`.
double percent_rank(std::span<const std::size_t> counts, double pivot);

/// Population standard deviation.
double population_stddev(std::span<const std::size_t> counts);

/// Splits clusters with polarized value occurrences at F = ln(segment count).
/// `occurrences[v]` is the number of segments carrying value v.
Clustering split_pass(Clustering clustering, std::span<const std::size_t> occurrences,
                      const RefinementThresholds& thresholds);

}  // namespace fieldclust
