#include "fieldclust/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace fieldclust {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool condition1_with(const DissimilarityMatrix& matrix, const Cluster& ci, const Cluster& cj,
                     const ClusterStats& si, const ClusterStats& sj, const LinkPair& link,
                     const RefinementThresholds& t) {
  if (!(link.d_link < std::max(si.mean_pairwise, sj.mean_pairwise))) return false;
  const ClusterStats& smaller = cj.members.size() < ci.members.size() ? sj : si;
  double eps = smaller.d_max / 2.0;
  auto rho_i = eps_density(matrix, ci, link.link_ij, eps);
  auto rho_j = eps_density(matrix, cj, link.link_ji, eps);
  if (!rho_i || !rho_j) return false;
  return std::abs(*rho_i - *rho_j) < t.eps_rho_threshold;
}

bool condition2_with(const Cluster& ci, const Cluster& cj, const ClusterStats& si,
                     const ClusterStats& sj, const LinkPair& link, const RefinementThresholds& t) {
  if (ci.members.size() < 2 || cj.members.size() < 2) return false;
  double bound = (si.minmed / si.mean_pairwise + sj.minmed / sj.mean_pairwise) / 2.0;
  return link.d_link < bound && std::abs(si.minmed - sj.minmed) < t.neighbor_density_threshold;
}

}  // namespace

LinkPair link_segments(const DissimilarityMatrix& matrix, const Cluster& ci, const Cluster& cj) {
  LinkPair link;
  link.i = ci.id;
  link.j = cj.id;
  link.d_link = std::numeric_limits<double>::infinity();
  for (auto a : ci.members) {
    for (auto b : cj.members) {
      double d = matrix(a, b);
      if (d < link.d_link ||
          (d == link.d_link && std::pair(a, b) < std::pair(link.link_ij, link.link_ji))) {
        link.d_link = d;
        link.link_ij = a;
        link.link_ji = b;
      }
    }
  }
  return link;
}

std::optional<double> eps_density(const DissimilarityMatrix& matrix, const Cluster& cluster,
                                  std::size_t link, double eps) {
  std::vector<double> near;
  for (auto c : cluster.members) {
    if (c == link) continue;
    double d = matrix(link, c);
    if (d <= eps) near.push_back(d);
  }
  if (near.empty()) return std::nullopt;
  return median_of(std::move(near));
}

bool condition1(const DissimilarityMatrix& matrix, const Cluster& ci, const Cluster& cj,
                const RefinementThresholds& thresholds) {
  return condition1_with(matrix, ci, cj, cluster_stats(matrix, ci), cluster_stats(matrix, cj),
                         link_segments(matrix, ci, cj), thresholds);
}

bool condition2(const DissimilarityMatrix& matrix, const Cluster& ci, const Cluster& cj,
                const RefinementThresholds& thresholds) {
  return condition2_with(ci, cj, cluster_stats(matrix, ci), cluster_stats(matrix, cj),
                         link_segments(matrix, ci, cj), thresholds);
}

Clustering merge_pass(const DissimilarityMatrix& matrix, Clustering clustering,
                      const RefinementThresholds& thresholds) {
  auto& clusters = clustering.clusters;
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.id < b.id; });

  std::map<std::size_t, ClusterStats> stats;
  for (const auto& c : clusters) stats[c.id] = cluster_stats(matrix, c);
  // Verdicts stay valid until one of the two clusters changes.
  std::map<std::pair<std::size_t, std::size_t>, bool> verdicts;

  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t a = 0; a < clusters.size() && !merged; ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const auto& ci = clusters[a];
        const auto& cj = clusters[b];
        auto key = std::pair(ci.id, cj.id);
        auto it = verdicts.find(key);
        if (it == verdicts.end()) {
          auto link = link_segments(matrix, ci, cj);
          const auto& si = stats[ci.id];
          const auto& sj = stats[cj.id];
          bool qualifies = condition1_with(matrix, ci, cj, si, sj, link, thresholds) ||
                           condition2_with(ci, cj, si, sj, link, thresholds);
          it = verdicts.emplace(key, qualifies).first;
        }
        if (!it->second) continue;

        std::size_t keep = ci.id;
        std::size_t gone = cj.id;
        auto& target = clusters[a].members;
        target.insert(target.end(), clusters[b].members.begin(), clusters[b].members.end());
        std::sort(target.begin(), target.end());
        clusters.erase(clusters.begin() + std::ptrdiff_t(b));
        stats.erase(gone);
        stats[keep] = cluster_stats(matrix, clusters[a]);
        std::erase_if(verdicts, [&](const auto& entry) {
          auto [x, y] = entry.first;
          return x == keep || y == keep || x == gone || y == gone;
        });
        merged = true;
        break;
      }
    }
  }
  canonicalize(clustering);
  return clustering;
}

double percent_rank(std::span<const std::size_t> counts, double pivot) {
  if (counts.empty()) return 0.0;
  auto below = std::count_if(counts.begin(), counts.end(), [&](std::size_t c) { return double(c) < pivot; });
  return 100.0 * double(below) / double(counts.size());
}

double population_stddev(std::span<const std::size_t> counts) {
  if (counts.empty()) return 0.0;
  double mean = 0.0;
  for (auto c : counts) mean += double(c);
  mean /= double(counts.size());
  double var = 0.0;
  for (auto c : counts) var += (double(c) - mean) * (double(c) - mean);
  return std::sqrt(var / double(counts.size()));
}

Clustering split_pass(Clustering clustering, std::span<const std::size_t> occurrences,
                      const RefinementThresholds& thresholds) {
  std::vector<Cluster> result;
  for (auto& c : clustering.clusters) {
    std::vector<std::size_t> counts;
    std::size_t segments = 0;
    for (auto v : c.members) {
      counts.push_back(occurrences[v]);
      segments += occurrences[v];
    }
    double pivot = std::log(double(segments));
    if (percent_rank(counts, pivot) > thresholds.split_percentile && population_stddev(counts) > pivot) {
      Cluster rare{c.id, {}};
      Cluster frequent{c.id, {}};
      for (auto v : c.members) (double(occurrences[v]) <= pivot ? rare : frequent).members.push_back(v);
      if (!rare.members.empty() && !frequent.members.empty()) {
        result.push_back(std::move(rare));
        result.push_back(std::move(frequent));
        continue;
      }
    }
    result.push_back(std::move(c));
  }
  clustering.clusters = std::move(result);
  canonicalize(clustering);
  return clustering;
}

}  // namespace fieldclust
