#include "fieldclust/evaluation.hpp"

#include <algorithm>
#include <iostream>
#include <map>

#include "fieldclust/error.hpp"

namespace fieldclust {

namespace {

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

}  // namespace

std::vector<std::string> value_labels(std::span<const SegmentValue> values,
                                      std::span<const Segment> segments) {
  std::vector<std::string> labels;
  labels.reserve(values.size());
  for (const auto& v : values) {
    std::vector<std::pair<std::string, std::size_t>> tally;  // first-seen order
    for (auto m : v.members) {
      const auto& t = segments[m].truth_type;
      if (!t)
        throw Error(ErrorKind::evaluation_unavailable,
                    "segment of value " + to_hex(v.bytes) + " has no ground-truth type");
      auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& e) { return e.first == *t; });
      if (it == tally.end()) {
        tally.emplace_back(*t, 1);
      } else {
        ++it->second;
      }
    }
    if (tally.empty())
      throw Error(ErrorKind::evaluation_unavailable, "value " + to_hex(v.bytes) + " has no segments");
    auto best = tally.begin();
    for (auto it = tally.begin(); it != tally.end(); ++it)
      if (it->second > best->second) best = it;
    labels.push_back(best->first);
  }
  return labels;
}

ContingencyTable contingency(const Clustering& clustering, std::span<const std::string> labels) {
  ContingencyTable table;
  std::map<std::string, std::size_t> index;
  for (const auto& l : labels) index.emplace(l, 0);
  for (auto& [name, i] : index) {
    i = table.types.size();
    table.types.push_back(name);
  }
  const std::size_t types = table.types.size();
  table.noise.assign(types, 0);
  table.totals.assign(types, 0);
  for (const auto& c : clustering.clusters) {
    std::vector<std::uint64_t> row(types, 0);
    for (auto m : c.members) ++row[index.at(labels[m])];
    table.counts.push_back(std::move(row));
  }
  for (auto m : clustering.noise) ++table.noise[index.at(labels[m])];
  for (std::size_t l = 0; l < types; ++l) {
    table.totals[l] = table.noise[l];
    for (const auto& row : table.counts) table.totals[l] += row[l];
  }
  return table;
}

PositivesNegatives positives_negatives(std::span<const Cluster> clusters) {
  PositivesNegatives pn;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    std::uint64_t ci = clusters[i].members.size();
    pn.tp_plus_fp += choose2(ci);
    for (std::size_t j = 0; j < clusters.size(); ++j)
      if (j != i) pn.tn_plus_fn += ci * clusters[j].members.size();
  }
  return pn;
}

std::uint64_t true_positives(const ContingencyTable& table) {
  std::uint64_t tp = 0;
  for (const auto& row : table.counts)
    for (auto t : row) tp += choose2(t);
  return tp;
}

std::uint64_t false_negatives(const ContingencyTable& table) {
  // Each half-weighted sum counts every cross pair once from either side, so
  // the two are added before halving to stay in integers.
  std::uint64_t cluster_side = 0;
  std::uint64_t noise_internal = 0;
  std::uint64_t noise_side = 0;
  for (std::size_t l = 0; l < table.types.size(); ++l) {
    for (const auto& row : table.counts) cluster_side += (table.totals[l] - row[l]) * row[l];
    noise_internal += choose2(table.noise[l]);
    noise_side += (table.totals[l] - table.noise[l]) * table.noise[l];
  }
  return (cluster_side + noise_side) / 2 + noise_internal;
}

double f_beta(double p, double r, double beta) {
  double b2 = beta * beta;
  double denom = b2 * p + r;
  if (denom <= 0.0) return 0.0;
  return (1.0 + b2) * p * r / denom;
}

double coverage(std::span<const Message> messages, std::span<const SegmentValue> values,
                const Clustering& clustering) {
  std::size_t total = total_bytes(messages);
  if (total == 0) return 0.0;
  std::size_t inferred = 0;
  for (const auto& c : clustering.clusters)
    for (auto v : c.members) inferred += values[v].bytes.size() * values[v].members.size();
  return double(inferred) / double(total);
}

Metrics evaluate(const Clustering& clustering, std::span<const std::string> labels,
                 double coverage_ratio, double beta) {
  auto table = contingency(clustering, labels);
  auto pn = positives_negatives(clustering.clusters);
  Metrics m;
  m.tp = true_positives(table);
  m.fp = pn.tp_plus_fp - m.tp;
  m.tn_plus_fn = pn.tn_plus_fn;
  m.fn = false_negatives(table);
  m.precision = m.tp + m.fp > 0 ? double(m.tp) / double(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn > 0 ? double(m.tp) / double(m.tp + m.fn) : 0.0;
  m.beta = beta;
  m.f_score = f_beta(m.precision, m.recall, beta);
  m.coverage = coverage_ratio;
  return m;
}

}  // namespace fieldclust
