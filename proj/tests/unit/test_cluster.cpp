#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nucleitrace/cluster.hpp"
#include "support/oracles.hpp"

using namespace nucleitrace;

namespace {

std::vector<Point> random_points(std::mt19937_64& rng, int n, int dim, double extent) {
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng), dim == 3 ? u(rng) : 0.0});
  return pts;
}

void expect_matches_oracle(const std::vector<Point>& pts, double cutoff) {
  const Clustering c = ward_cluster(pts, cutoff);
  const oracle::Agglomeration o = oracle::naive_ward(pts, cutoff);
  EXPECT_EQ(c.assignment, o.assignment);
  ASSERT_EQ(c.merges.size(), o.merges.size());
  for (std::size_t k = 0; k < o.merges.size(); ++k) {
    EXPECT_EQ(c.merges[k].a, o.merges[k].a);
    EXPECT_EQ(c.merges[k].b, o.merges[k].b);
    EXPECT_NEAR(c.merges[k].height, o.merges[k].height, 1e-9 * (1.0 + o.merges[k].height));
  }
}

}  // namespace

TEST(AdaptiveCutoff, FallbackForTinySets) {
  const std::vector<Point> one{{1, 2, 0}};
  EXPECT_EQ(adaptive_cutoff(one, 17.0), 17.0);
  const std::vector<Point> three{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  EXPECT_EQ(adaptive_cutoff(three, 9.0), 9.0);
  EXPECT_EQ(adaptive_cutoff({}, 4.0), 4.0);
}

TEST(AdaptiveCutoff, FourPointsUseRankThreeOnly) {
  // Unit square: 3rd nearest neighbor of every corner is the diagonal.
  const std::vector<Point> sq{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  EXPECT_DOUBLE_EQ(adaptive_cutoff(sq, 0.0), 0.5 * std::sqrt(2.0));
}

TEST(AdaptiveCutoff, UnitGridMatchesBruteForce) {
  std::vector<Point> grid;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) grid.push_back({double(x), double(y), 0});
  EXPECT_EQ(adaptive_cutoff(grid, 1.0), oracle::brute_adaptive_cutoff(grid, 1.0));
}

TEST(AdaptiveCutoff, RandomSetsMatchBruteForce) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = random_points(rng, 1 + trial % 30, 2 + trial % 2, 100.0);
    EXPECT_EQ(adaptive_cutoff(pts, 5.0), oracle::brute_adaptive_cutoff(pts, 5.0));
  }
}

TEST(AdaptiveCutoff, ScalesLinearlyAndIgnoresTranslation) {
  std::mt19937_64 rng(32);
  const auto pts = random_points(rng, 25, 3, 50.0);
  const double base = adaptive_cutoff(pts, 1.0);
  for (double s : {0.5, 2.0, 8.0}) {
    std::vector<Point> scaled = pts;
    for (Point& p : scaled)
      for (double& v : p) v *= s;
    EXPECT_NEAR(adaptive_cutoff(scaled, 1.0), s * base, 1e-12 * s * base);
  }
  std::vector<Point> moved = pts;
  for (Point& p : moved) p[0] += 1000.0;
  EXPECT_NEAR(adaptive_cutoff(moved, 1.0), base, 1e-9);
}

TEST(WardCluster, Trivial) {
  const std::vector<Point> one{{3, 3, 0}};
  const Clustering c = ward_cluster(one, 1.0);
  EXPECT_EQ(c.count, 1);
  EXPECT_EQ(c.assignment, std::vector<int>{0});
  EXPECT_TRUE(ward_cluster({}, 1.0).assignment.empty());
  EXPECT_THROW(ward_cluster(one, 0.0), ParameterError);
}

TEST(WardCluster, TwoPointsMergeAtTheirDistance) {
  const std::vector<Point> two{{0, 0, 0}, {6, 8, 0}};
  EXPECT_EQ(ward_cluster(two, 3.0).count, 2);
  const Clustering c = ward_cluster(two, 20.0);
  EXPECT_EQ(c.count, 1);
  ASSERT_EQ(c.merges.size(), 1u);
  EXPECT_DOUBLE_EQ(c.merges[0].height, 10.0);
  EXPECT_EQ(ward_cluster(two, 10.0).count, 1);
}

TEST(WardCluster, ClustersAreNumberedBySmallestMember) {
  const std::vector<Point> pts{{50, 0, 0}, {0, 0, 0}, {51, 0, 0}, {1, 0, 0}};
  const Clustering c = ward_cluster(pts, 5.0);
  EXPECT_EQ(c.assignment, (std::vector<int>{0, 1, 0, 1}));
  EXPECT_EQ(c.members(), (std::vector<std::vector<int>>{{0, 2}, {1, 3}}));
}

TEST(WardCluster, TiesResolveToLowestPair) {
  // Equilateral-ish ties on a line: 0-1 and 1-2 at the same distance.
  const std::vector<Point> pts{{0, 0, 0}, {2, 0, 0}, {4, 0, 0}};
  const Clustering c = ward_cluster(pts, 2.0);
  ASSERT_EQ(c.merges.size(), 1u);
  EXPECT_EQ(c.merges[0].a, 0);
  EXPECT_EQ(c.merges[0].b, 1);
  expect_matches_oracle(pts, 2.0);
}

TEST(WardCluster, MatchesNaiveOracleOnRandomInstances) {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<int> size(1, 10);
  std::uniform_real_distribution<double> cut(1.0, 60.0);
  for (int trial = 0; trial < 600; ++trial) {
    const auto pts = random_points(rng, size(rng), 2 + trial % 2, 40.0);
    expect_matches_oracle(pts, cut(rng));
  }
}

TEST(WardCluster, MatchesNaiveOracleOnLargerClumpySets) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> jitter(0.0, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> pts;
    for (const Point& c : random_points(rng, 12, 3, 100.0))
      for (int k = 0; k < 3; ++k) pts.push_back({c[0] + jitter(rng), c[1] + jitter(rng), c[2] + jitter(rng)});
    expect_matches_oracle(pts, 8.0);
  }
}
