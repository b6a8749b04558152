#include <gtest/gtest.h>

#include "fieldclust/error.hpp"
#include "fieldclust/evaluation.hpp"
#include "support.hpp"

using namespace fieldclust;
using namespace fieldclust::testing;

namespace {

Clustering make(std::vector<std::vector<std::size_t>> clusters, std::vector<std::size_t> noise = {}) {
  Clustering c;
  for (auto& m : clusters) c.clusters.push_back({c.clusters.size(), std::move(m)});
  c.noise = std::move(noise);
  return c;
}

std::vector<long> labels_vec(const Clustering& c, std::size_t n) {
  auto l = labels_of(c, n);
  return {l.begin(), l.end()};
}

Segment labeled(Bytes b, std::string type) {
  Segment s;
  s.length = b.size();
  s.bytes = std::move(b);
  s.truth_type = std::move(type);
  return s;
}

}  // namespace

TEST(PositivesNegatives, Examples) {
  auto c = make({{0, 1, 2}, {3, 4}});
  auto pn = positives_negatives(c.clusters);
  EXPECT_EQ(pn.tp_plus_fp, 4u);
  EXPECT_EQ(pn.tn_plus_fn, 12u);  // ordered pairs: 3*2 + 2*3
  auto one = make({{0, 1, 2, 3}});
  EXPECT_EQ(positives_negatives(one.clusters).tn_plus_fn, 0u);
}

TEST(TruePositives, Examples) {
  std::vector<std::string> same(4, "A");
  EXPECT_EQ(true_positives(contingency(make({{0, 1, 2, 3}}), same)), 6u);
  std::vector<std::string> mixed{"A", "A", "B", "B"};
  EXPECT_EQ(true_positives(contingency(make({{0, 1, 2, 3}}), mixed)), 2u);
}

TEST(FalseNegatives, Examples) {
  std::vector<std::string> a(4, "A");
  EXPECT_EQ(false_negatives(contingency(make({{0, 1, 2, 3}}), a)), 0u);
  EXPECT_EQ(false_negatives(contingency(make({{0, 1}, {2, 3}}), a)), 4u);
  // Noise-internal and noise-to-cluster pairs.
  EXPECT_EQ(false_negatives(contingency(make({{0, 1}}, {2, 3}), a)), 5u);
}

TEST(Contingency, Table) {
  std::vector<std::string> labels{"b", "a", "b", "c", "a"};
  auto t = contingency(make({{0, 1}, {2, 4}}, {3}), labels);
  EXPECT_EQ(t.types, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(t.counts[0], (std::vector<std::uint64_t>{1, 1, 0}));
  EXPECT_EQ(t.counts[1], (std::vector<std::uint64_t>{1, 1, 0}));
  EXPECT_EQ(t.noise, (std::vector<std::uint64_t>{0, 0, 1}));
  EXPECT_EQ(t.totals, (std::vector<std::uint64_t>{2, 2, 1}));
}

TEST(Metrics, BruteForceOnRandomClusterings) {
  std::mt19937_64 rng(404);
  for (int t = 0; t < 300; ++t) {
    std::size_t n = 1 + rng() % 60;
    std::size_t k = 1 + rng() % 6, types = 1 + rng() % 5;
    std::vector<std::vector<std::size_t>> clusters(k);
    std::vector<std::size_t> noise;
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = std::string(1, char('A' + rng() % types));
      if (rng() % 4 == 0)
        noise.push_back(i);
      else
        clusters[rng() % k].push_back(i);
    }
    std::erase_if(clusters, [](const auto& c) { return c.empty(); });
    auto c = make(clusters, noise);
    auto m = evaluate(c, labels, 0.5);
    auto o = oracle_pairs(labels_vec(c, n), labels);
    ASSERT_EQ(m.tp, o.tp);
    ASSERT_EQ(m.fp, o.fp);
    ASSERT_EQ(m.fn, o.fn);
    ASSERT_EQ(m.tp + m.fn, o.same_type);
    std::uint64_t cross = 0;
    for (std::size_t i = 0; i < c.clusters.size(); ++i)
      for (std::size_t j = 0; j < c.clusters.size(); ++j)
        if (i != j) cross += c.clusters[i].members.size() * c.clusters[j].members.size();
    ASSERT_EQ(m.tn_plus_fn, cross);
    ASSERT_GE(m.precision, 0.0);
    ASSERT_LE(m.precision, 1.0);
    ASSERT_GE(m.recall, 0.0);
    ASSERT_LE(m.recall, 1.0);
    ASSERT_GE(m.f_score, 0.0);
    ASSERT_LE(m.f_score, 1.0);
    if (o.tp + o.fp) ASSERT_DOUBLE_EQ(m.precision, double(o.tp) / double(o.tp + o.fp));
    if (o.tp + o.fn) ASSERT_DOUBLE_EQ(m.recall, double(o.tp) / double(o.tp + o.fn));

    // Relabeling and member order do not matter.
    auto shuffled = c;
    std::shuffle(shuffled.clusters.begin(), shuffled.clusters.end(), rng);
    for (std::size_t i = 0; i < shuffled.clusters.size(); ++i) {
      shuffled.clusters[i].id = 100 + i;
      std::shuffle(shuffled.clusters[i].members.begin(), shuffled.clusters[i].members.end(), rng);
    }
    ASSERT_EQ(evaluate(shuffled, labels, 0.5), m);
  }
}

TEST(Metrics, DegenerateCases) {
  std::vector<std::string> labels{"A", "B", "C"};
  auto m = evaluate(make({}, {0, 1, 2}), labels, 0.0);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f_score, 0.0);
  EXPECT_EQ(m.beta, 0.25);
}

TEST(FBeta, Examples) {
  for (double x : {0.1, 0.5, 0.93, 1.0}) EXPECT_NEAR(f_beta(x, x, 0.25), x, 1e-12);
  EXPECT_NEAR(f_beta(1.0, 0.96, 0.25), 0.9976, 5e-5);
  EXPECT_NEAR(f_beta(0.59, 0.70, 0.25), 0.596, 1e-3);
  EXPECT_EQ(f_beta(0.0, 0.0, 0.25), 0.0);
  EXPECT_NEAR(f_beta(0.5, 1.0, 1.0), 2.0 / 3, 1e-12);
}

TEST(Coverage, Accounting) {
  std::vector<Message> msgs{{0, {1, 2, 3, 4, 5, 6}, 0}, {1, {1, 2, 9, 9, 7, 0}, 1}};
  // Values: [1,2] x2, [3,4], [5,6], [9,9], [7,0].
  std::vector<Segment> segs{labeled({1, 2}, "a"), labeled({3, 4}, "b"), labeled({5, 6}, "c"),
                            labeled({1, 2}, "a"), labeled({9, 9}, "b"), labeled({7, 0}, "c")};
  auto values = unique_values(segs);
  ASSERT_EQ(values.size(), 5u);
  EXPECT_DOUBLE_EQ(coverage(msgs, values, make({{0, 1, 2, 3, 4}})), 1.0);
  EXPECT_DOUBLE_EQ(coverage(msgs, values, make({}, {0, 1, 2, 3, 4})), 0.0);
  // [1,2] twice and [9,9]: 6 of 12 bytes.
  EXPECT_DOUBLE_EQ(coverage(msgs, values, make({{0, 3}}, {1, 2, 4})), 0.5);
}

TEST(ValueLabels, MajorityAndErrors) {
  std::vector<Segment> segs{labeled({1, 2}, "x"), labeled({1, 2}, "y"), labeled({1, 2}, "y"),
                            labeled({3, 4}, "p"), labeled({3, 4}, "q")};
  auto values = unique_values(segs);
  auto labels = value_labels(values, segs);
  EXPECT_EQ(labels, (std::vector<std::string>{"y", "p"}));

  segs.push_back(labeled({5, 6}, "z"));
  segs.back().truth_type.reset();
  auto v2 = unique_values(segs);
  try {
    value_labels(v2, segs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::evaluation_unavailable);
  }
}
