#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nucleitrace/distance.hpp"
#include "support/oracles.hpp"

using namespace nucleitrace;

TEST(DistanceMap, AllForegroundIsZero) {
  const LabelImage fg(Dims(6, 5, 4), 3);
  for (float v : euclidean_distance_map(fg)) EXPECT_EQ(v, 0.0f);
}

TEST(DistanceMap, NoForegroundThrows) {
  EXPECT_THROW(euclidean_distance_map(LabelImage(Dims(4, 4))), DataError);
}

TEST(DistanceMap, SingleSeedIsRadialDistance) {
  LabelImage fg(Dims(32, 32));
  fg.at(11, 20) = 1;
  const Image d = euclidean_distance_map(fg);
  for (Index y = 0; y < 32; ++y)
    for (Index x = 0; x < 32; ++x)
      EXPECT_EQ(d.at(x, y), static_cast<float>(std::sqrt(double((x - 11) * (x - 11) + (y - 20) * (y - 20)))));
  EXPECT_EQ(d, oracle::brute_distance(fg));
}

TEST(DistanceMap, TwoSeedsMidlineEquidistant) {
  LabelImage fg(Dims(31, 15));
  fg.at(5, 7) = 1;
  fg.at(25, 7) = 2;
  const Image d = euclidean_distance_map(fg);
  EXPECT_EQ(d, oracle::brute_distance(fg));
  for (Index y = 0; y < 15; ++y) {
    EXPECT_EQ(d.at(15, y), static_cast<float>(std::hypot(10.0, double(y - 7))));
    EXPECT_EQ(d.at(10, y), d.at(20, y));
  }
}

TEST(DistanceMap, RandomVolumesMatchBruteForceExactly) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> density(0.005, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    LabelImage fg(Dims(16, 16, 16));
    const double p = density(rng);
    std::bernoulli_distribution on(p);
    for (Label& v : fg) v = on(rng) ? 1 : 0;
    fg.at(static_cast<Index>(rng() % 16), static_cast<Index>(rng() % 16), static_cast<Index>(rng() % 16)) = 1;
    ASSERT_EQ(euclidean_distance_map(fg), oracle::brute_distance(fg)) << "trial " << trial;
  }
}

TEST(DistanceMap, SpacingWeightsAxes) {
  LabelImage fg(Dims(5, 5, 5), 0, Spacing{1.0, 1.0, 2.5});
  fg.at(2, 2, 0) = 1;
  const Image d = euclidean_distance_map(fg, true);
  EXPECT_FLOAT_EQ(d.at(2, 2, 2), 5.0f);
  EXPECT_FLOAT_EQ(d.at(4, 2, 0), 2.0f);
  EXPECT_FLOAT_EQ(d.at(4, 2, 1), static_cast<float>(std::hypot(2.0, 2.5)));
}
