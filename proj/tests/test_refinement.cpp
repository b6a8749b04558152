#include <gtest/gtest.h>

#include <cmath>

#include "fieldclust/refinement.hpp"
#include "support.hpp"

using namespace fieldclust;
using namespace fieldclust::testing;

namespace {

struct Builder {
  std::vector<std::vector<double>> d;
  explicit Builder(std::size_t n, double fill) : d(n, std::vector<double>(n, fill)) {
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  }
  Builder& set(std::size_t a, std::size_t b, double v) {
    d[a][b] = d[b][a] = v;
    return *this;
  }
  Builder& block(std::size_t from, std::size_t to, double v) {
    for (std::size_t a = from; a < to; ++a)
      for (std::size_t b = a + 1; b < to; ++b) set(a, b, v);
    return *this;
  }
  DissimilarityMatrix build() const { return matrix_from(d); }
};

// Two triangles; the link pair is (2, 3). rho_j depends on `near_j`.
DissimilarityMatrix triangles(double near_j, double d_link) {
  return Builder(6, 0.5)
      .set(0, 1, 0.2).set(0, 2, 0.04).set(1, 2, 0.04)
      .set(4, 5, 0.2).set(3, 4, near_j).set(3, 5, near_j)
      .set(2, 3, d_link)
      .build();
}

const Cluster kI{0, {0, 1, 2}};
const Cluster kJ{1, {3, 4, 5}};

std::vector<std::size_t> all_members(const Clustering& c) {
  std::vector<std::size_t> out;
  for (const auto& cl : c.clusters) out.insert(out.end(), cl.members.begin(), cl.members.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(LinkSegments, ClosestCrossPair) {
  auto m = triangles(0.045, 0.05);
  auto link = link_segments(m, kI, kJ);
  EXPECT_EQ(link.i, 0u);
  EXPECT_EQ(link.j, 1u);
  EXPECT_EQ(link.link_ij, 2u);
  EXPECT_EQ(link.link_ji, 3u);
  EXPECT_DOUBLE_EQ(link.d_link, 0.05);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    auto r = random_matrix(12, rng);
    Cluster a{0, {0, 3, 5, 7}}, b{1, {1, 2, 9, 11}};
    auto l = link_segments(r, a, b);
    for (auto x : a.members)
      for (auto y : b.members) ASSERT_LE(l.d_link, r(x, y));
    ASSERT_EQ(l.d_link, r(l.link_ij, l.link_ji));
  }
}

TEST(EpsDensity, MedianWithinBall) {
  auto m = Builder(4, 0.5).set(0, 1, 0.01).set(0, 2, 0.03).set(0, 3, 0.2).build();
  Cluster c{0, {0, 1, 2, 3}};
  EXPECT_DOUBLE_EQ(*eps_density(m, c, 0, 0.05), 0.02);
  EXPECT_DOUBLE_EQ(*eps_density(m, c, 0, 0.01), 0.01);
  EXPECT_FALSE(eps_density(m, c, 0, 0.005).has_value());
  EXPECT_FALSE(eps_density(m, Cluster{0, {0}}, 0, 1.0).has_value());
}

TEST(Condition1, CloseClustersWithSimilarLinkDensity) {
  RefinementThresholds t;
  EXPECT_TRUE(condition1(triangles(0.045, 0.05), kI, kJ, t));
  EXPECT_FALSE(condition1(triangles(0.06, 0.05), kI, kJ, t));  // |rho_i - rho_j| = 0.02
  EXPECT_FALSE(condition1(triangles(0.045, 0.3), kI, kJ, t));  // link beyond both means
  EXPECT_FALSE(condition2(triangles(0.045, 0.05), kI, kJ, t)); // minmed differs by 0.005
}

TEST(Condition1, UndefinedDensityNeverMerges) {
  // Within-cluster distances exceed half the extent of the smaller cluster
  // everywhere around the link segment.
  auto m = Builder(4, 0.9).set(0, 1, 0.3).set(2, 3, 0.3).set(1, 2, 0.1).build();
  EXPECT_FALSE(condition1(m, Cluster{0, {0, 1}}, Cluster{1, {2, 3}}, {}));
}

TEST(Condition2, SimilarMinmed) {
  RefinementThresholds t;
  // Link too long for condition 1, densities match within 0.002.
  auto m = triangles(0.041, 0.3);
  EXPECT_FALSE(condition1(m, kI, kJ, t));
  EXPECT_TRUE(condition2(m, kI, kJ, t));
  EXPECT_FALSE(condition2(triangles(0.043, 0.3), kI, kJ, t));
  // Link beyond the bound: both ratios are about 0.43.
  EXPECT_FALSE(condition2(triangles(0.041, 0.45), kI, kJ, t));
  // Singletons never qualify.
  EXPECT_FALSE(condition2(m, Cluster{0, {2}}, kJ, t));
}

TEST(MergePass, ChainCollapsesOthersStay) {
  // Three clusters of identical density next to each other, one loose cluster
  // far away.
  Builder b(12, 0.5);
  b.block(0, 3, 0.04).block(3, 6, 0.04).block(6, 9, 0.04);
  b.set(2, 3, 0.041).set(5, 6, 0.041);
  b.block(9, 12, 0.2);
  for (std::size_t x = 9; x < 12; ++x)
    for (std::size_t y = 0; y < 9; ++y) b.set(x, y, 0.9);
  auto m = b.build();
  Clustering c;
  c.clusters = {{0, {0, 1, 2}}, {1, {3, 4, 5}}, {2, {6, 7, 8}}, {3, {9, 10, 11}}};
  auto merged = merge_pass(m, c, {});
  ASSERT_EQ(merged.clusters.size(), 2u);
  EXPECT_EQ(merged.clusters[0].members, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(merged.clusters[1].members, (std::vector<std::size_t>{9, 10, 11}));
  EXPECT_EQ(merge_pass(m, merged, {}).clusters, merged.clusters);
}

TEST(MergePass, FixpointIdempotentAndMembershipPreserving) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 30; ++t) {
    auto m = two_scale_matrix({12, 12, 12}, 4, 0.05, 0.6, rng);
    // Fragment DBSCAN output with a small epsilon.
    auto c = dbscan(m, 0.045, 2);
    auto merged = merge_pass(m, c, {});
    EXPECT_EQ(all_members(merged), all_members(c));
    EXPECT_EQ(merged.noise, c.noise);
    for (std::size_t a = 0; a < merged.clusters.size(); ++a)
      for (std::size_t b = a + 1; b < merged.clusters.size(); ++b) {
        ASSERT_FALSE(condition1(m, merged.clusters[a], merged.clusters[b], {}));
        ASSERT_FALSE(condition2(m, merged.clusters[a], merged.clusters[b], {}));
      }
    EXPECT_EQ(merge_pass(m, merged, {}).clusters, merged.clusters);
  }
}

TEST(MergePass, NothingToMerge) {
  Clustering c;
  c.clusters = {kI};
  auto m = triangles(0.045, 0.05);
  EXPECT_EQ(merge_pass(m, c, {}).clusters, c.clusters);
  EXPECT_TRUE(merge_pass(m, Clustering{}, {}).clusters.empty());
}

TEST(SplitHelpers, Formulas) {
  std::vector<std::size_t> counts{1, 1, 2, 5, 10};
  EXPECT_DOUBLE_EQ(percent_rank(counts, 2.0), 40.0);
  EXPECT_DOUBLE_EQ(percent_rank(counts, 2.5), 60.0);
  EXPECT_DOUBLE_EQ(population_stddev(std::vector<std::size_t>{2, 4, 4, 4, 5, 5, 7, 9}), 2.0);
  EXPECT_DOUBLE_EQ(population_stddev(std::vector<std::size_t>{3, 3, 3}), 0.0);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::size_t> v(1 + rng() % 40);
    for (auto& x : v) x = 1 + rng() % 50;
    double pivot = double(rng() % 60);
    std::size_t below = 0;
    for (auto x : v) below += double(x) < pivot;
    ASSERT_DOUBLE_EQ(percent_rank(v, pivot), 100.0 * double(below) / double(v.size()));
    double mean = 0, sq = 0;
    for (auto x : v) mean += double(x);
    mean /= double(v.size());
    for (auto x : v) sq += (double(x) - mean) * (double(x) - mean);
    ASSERT_NEAR(population_stddev(v), std::sqrt(sq / double(v.size())), 1e-9);
  }
}

TEST(SplitPass, Examples) {
  Clustering c;
  Cluster big{0, {}};
  for (std::size_t i = 0; i < 96; ++i) big.members.push_back(i);
  c.clusters = {big};

  std::vector<std::size_t> unique(96, 1);
  EXPECT_EQ(split_pass(c, unique, {}).clusters.size(), 1u);

  // 95 rare values plus one carried by 100 segments: PR = 98.96, sigma = 10.05
  // against F = ln 195 = 5.27.
  auto occ = unique;
  occ[40] = 100;
  auto split = split_pass(c, occ, {});
  ASSERT_EQ(split.clusters.size(), 2u);
  EXPECT_EQ(split.clusters[0].members.size(), 95u);
  EXPECT_EQ(split.clusters[1].members, (std::vector<std::size_t>{40}));
  EXPECT_EQ(split.clusters[0].id, 0u);
  EXPECT_EQ(split.clusters[1].id, 1u);
  EXPECT_EQ(all_members(split), big.members);

  // 19 rare of 20 values: PR is exactly 95, not above.
  Clustering small;
  Cluster twenty{0, {}};
  for (std::size_t i = 0; i < 20; ++i) twenty.members.push_back(i);
  small.clusters = {twenty};
  std::vector<std::size_t> occ20(20, 1);
  occ20[0] = 100;
  EXPECT_EQ(split_pass(small, occ20, {}).clusters.size(), 1u);
}

TEST(SplitPass, MatchesFormulaOnRandomClusters) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    std::size_t n = 2 + rng() % 60;
    std::vector<std::size_t> occ(n);
    for (auto& o : occ) o = rng() % 5 ? 1 + rng() % 2 : 1 + rng() % 300;
    Clustering c;
    Cluster all{0, {}};
    for (std::size_t i = 0; i < n; ++i) all.members.push_back(i);
    c.clusters = {all};
    auto out = split_pass(c, occ, {});

    double segments = 0;
    for (auto o : occ) segments += double(o);
    double f = std::log(segments);
    std::size_t below = 0, le = 0;
    double mean = segments / double(n), sq = 0;
    for (auto o : occ) {
      below += double(o) < f;
      le += double(o) <= f;
      sq += (double(o) - mean) * (double(o) - mean);
    }
    bool expect = 100.0 * double(below) / double(n) > 95.0 && std::sqrt(sq / double(n)) > f && le > 0 && le < n;
    ASSERT_EQ(out.clusters.size(), expect ? 2u : 1u) << t;
    ASSERT_EQ(all_members(out), all.members);
    if (expect)
      for (const auto& cl : out.clusters) {
        bool rare = double(occ[cl.members[0]]) <= f;
        for (auto v : cl.members) ASSERT_EQ(double(occ[v]) <= f, rare);
      }
  }
}
