#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fieldclust/autoconf.hpp"
#include "fieldclust/dissimilarity.hpp"

namespace fieldclust {

struct ClusterStats {
  double mean_pairwise = 0.0;  // mean over unordered member pairs
  double minmed = 0.0;         // median of each member's nearest-neighbor dissimilarity
  double d_max = 0.0;          // extent
  bool singleton = false;

  friend bool operator==(const ClusterStats&, const ClusterStats&) = default;
};

/// Members are SegmentValue indices (rows of the dissimilarity matrix).
struct Cluster {
  std::size_t id = 0;
  std::vector<std::size_t> members;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// Clusters and noise partition the value indices.
struct Clustering {
  std::vector<Cluster> clusters;
  std::vector<std::size_t> noise;
  AutoConfig params;
};

/// Points with at least `min_samples` values (itself included) within the
/// closed ball of radius epsilon.
std::vector<bool> core_points(const DissimilarityMatrix& matrix, double epsilon,
                              std::size_t min_samples);

/// DBSCAN on precomputed dissimilarities. Border points join the cluster of
/// their lowest-index core neighbor; clusters are numbered by lowest member.
Clustering dbscan(const DissimilarityMatrix& matrix, double epsilon, std::size_t min_samples);

ClusterStats cluster_stats(const DissimilarityMatrix& matrix, const Cluster& cluster);

/// Sorts members and noise, orders clusters by lowest member and renumbers
/// them from 0.
void canonicalize(Clustering& clustering);

/// Per-value cluster id, -1 for noise.
std::vector<std::int64_t> labels_of(const Clustering& clustering, std::size_t n);

inline constexpr std::size_t kMaxRetrims = 3;

/// DBSCAN with the selected parameters, re-trimming epsilon while one
/// cluster dominates (at most kMaxRetrims times).
Clustering cluster_with_retrim(const DissimilarityMatrix& matrix, const AutoConfig& config,
                               std::size_t max_retrims = kMaxRetrims);

}  // namespace fieldclust
