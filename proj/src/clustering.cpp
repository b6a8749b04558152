#include "fieldclust/clustering.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

namespace fieldclust {

namespace {

constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<bool> core_points(const DissimilarityMatrix& matrix, double epsilon,
                              std::size_t min_samples) {
  const std::size_t n = matrix.size();
  std::vector<std::size_t> count(n, 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (matrix(i, j) <= epsilon) {
        ++count[i];
        ++count[j];
      }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = count[i] >= min_samples;
  return core;
}

Clustering dbscan(const DissimilarityMatrix& matrix, double epsilon, std::size_t min_samples) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("DBSCAN epsilon must be positive");
  const std::size_t n = matrix.size();
  if (min_samples < 1 || min_samples > std::max<std::size_t>(n, 1))
    throw std::invalid_argument("DBSCAN min_samples out of range");

  const auto core = core_points(matrix, epsilon, min_samples);
  std::vector<std::size_t> label(n, kUnassigned);
  std::size_t next_label = 0;

  // Connected components of the core graph.
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || label[seed] != kUnassigned) continue;
    std::deque<std::size_t> queue{seed};
    label[seed] = next_label;
    while (!queue.empty()) {
      std::size_t p = queue.front();
      queue.pop_front();
      for (std::size_t q = 0; q < n; ++q) {
        if (q == p || !core[q] || label[q] != kUnassigned) continue;
        if (matrix(p, q) <= epsilon) {
          label[q] = next_label;
          queue.push_back(q);
        }
      }
    }
    ++next_label;
  }

  Clustering out;
  out.clusters.resize(next_label);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) {
      for (std::size_t c = 0; c < n; ++c) {
        if (core[c] && c != i && matrix(i, c) <= epsilon) {
          label[i] = label[c];
          break;
        }
      }
    }
    if (label[i] == kUnassigned) {
      out.noise.push_back(i);
    } else {
      out.clusters[label[i]].members.push_back(i);
    }
  }
  out.params.epsilon = epsilon;
  out.params.min_samples = min_samples;
  canonicalize(out);
  return out;
}

ClusterStats cluster_stats(const DissimilarityMatrix& matrix, const Cluster& cluster) {
  const auto& m = cluster.members;
  ClusterStats stats;
  if (m.size() < 2) {
    stats.singleton = true;
    return stats;
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  std::vector<double> nearest(m.size(), std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = a + 1; b < m.size(); ++b) {
      double d = matrix(m[a], m[b]);
      sum += d;
      ++pairs;
      stats.d_max = std::max(stats.d_max, d);
      nearest[a] = std::min(nearest[a], d);
      nearest[b] = std::min(nearest[b], d);
    }
  }
  stats.mean_pairwise = sum / double(pairs);
  stats.minmed = median_of(std::move(nearest));
  return stats;
}

void canonicalize(Clustering& clustering) {
  auto& cs = clustering.clusters;
  std::erase_if(cs, [](const Cluster& c) { return c.members.empty(); });
  for (auto& c : cs) std::sort(c.members.begin(), c.members.end());
  std::sort(clustering.noise.begin(), clustering.noise.end());
  std::sort(cs.begin(), cs.end(),
            [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });
  for (std::size_t i = 0; i < cs.size(); ++i) cs[i].id = i;
}

std::vector<std::int64_t> labels_of(const Clustering& clustering, std::size_t n) {
  std::vector<std::int64_t> labels(n, -1);
  for (const auto& c : clustering.clusters)
    for (auto m : c.members) labels[m] = std::int64_t(c.id);
  return labels;
}

Clustering cluster_with_retrim(const DissimilarityMatrix& matrix, const AutoConfig& config,
                               std::size_t max_retrims) {
  AutoConfig cfg = config;
  Clustering clustering = dbscan(matrix, cfg.epsilon, cfg.min_samples);
  for (std::size_t round = 0; round < max_retrims && has_giant_cluster(clustering); ++round) {
    AutoConfig next = retrim_epsilon(matrix, cfg, clustering);
    if (next.retrim_stalled) {
      cfg = next;
      break;
    }
    cfg = next;
    clustering = dbscan(matrix, cfg.epsilon, cfg.min_samples);
  }
  if (has_giant_cluster(clustering) && cfg.retrim_count >= max_retrims) cfg.retrim_capped = true;
  clustering.params = cfg;
  return clustering;
}

}  // namespace fieldclust
