#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "nucleitrace/diagnostics.hpp"
#include "nucleitrace/filters.hpp"
#include "nucleitrace/morphology.hpp"
#include "support/oracles.hpp"

using namespace nucleitrace;

namespace {

float max_abs_diff(const Image& a, const Image& b) {
  float m = 0.0f;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Image square(Index n, Index lo, Index side) {
  Image img(Dims(n, n));
  for (Index y = lo; y < lo + side; ++y)
    for (Index x = lo; x < lo + side; ++x) img.at(x, y) = 1.0f;
  return img;
}

}  // namespace

TEST(GaussianFilter, PreservesConstants) {
  const Image img(Dims(17, 9, 5), 42.5f);
  const Image out = gaussian_filter(img, 3.0);
  for (float v : out) EXPECT_NEAR(v, 42.5f, 1e-4);
  EXPECT_EQ(out.dims(), img.dims());
}

TEST(GaussianFilter, ZeroSigmaIsIdentity) {
  std::mt19937_64 rng(1);
  const Image img = oracle::random_image(Dims(12, 11, 4), rng, 0, 100);
  EXPECT_EQ(gaussian_filter(img, 0.0), img);
  // Only the z axis is left untouched.
  const double sigma[] = {1.0, 1.0, 0.0};
  const Image a = gaussian_filter(img, sigma);
  const double sigma_xy[] = {1.0, 1.0};
  for (Index z = 0; z < 4; ++z) {
    Image slice(Dims(12, 11));
    for (Index y = 0; y < 11; ++y)
      for (Index x = 0; x < 12; ++x) slice.at(x, y) = img.at(x, y, z);
    const Image s = gaussian_filter(slice, sigma_xy);
    for (Index y = 0; y < 11; ++y)
      for (Index x = 0; x < 12; ++x) EXPECT_FLOAT_EQ(a.at(x, y, z), s.at(x, y));
  }
}

TEST(GaussianFilter, ImpulseMatchesDenseConvolution) {
  Image img(Dims(33, 33, 33));
  img.at(16, 16, 16) = 1.0f;
  const double sigma[] = {2.0, 2.0, 2.0};
  const Image fast = gaussian_filter(img, sigma);
  const Image dense = oracle::dense_gaussian(img, sigma);
  EXPECT_LT(max_abs_diff(fast, dense), 1e-6f);
}

TEST(GaussianFilter, AnisotropicRandomMatchesDense) {
  std::mt19937_64 rng(7);
  const Image img = oracle::random_image(Dims(14, 10, 6), rng, 0, 1);
  const double sigma[] = {1.5, 0.7, 1.0};
  EXPECT_LT(max_abs_diff(gaussian_filter(img, sigma), oracle::dense_gaussian(img, sigma)), 1e-5f);
}

TEST(GaussianFilter, RejectsBadSigma) {
  const Image img(Dims(4, 4));
  const double three[] = {1, 1, 1};
  EXPECT_THROW(gaussian_filter(img, three), ParameterError);
  EXPECT_THROW(gaussian_filter(img, -1.0), ParameterError);
}

TEST(MedianFilter, RadiusZeroIsIdentity) {
  std::mt19937_64 rng(2);
  const Image img = oracle::random_image(Dims(9, 9, 3), rng, 0, 10);
  EXPECT_EQ(median_filter(img, StructuringRadius(0)), img);
}

TEST(MedianFilter, RemovesSaltPixel) {
  Image img(Dims(15, 15, 5));
  img.at(7, 7, 2) = 255.0f;
  const Image out = median_filter(img, StructuringRadius(1));
  for (float v : out) EXPECT_EQ(v, 0.0f);
}

TEST(MedianFilter, MatchesSortOracle) {
  std::mt19937_64 rng(3);
  for (int r : {1, 2}) {
    const Image img2 = oracle::random_image(Dims(11, 8), rng, 0, 50);
    EXPECT_EQ(median_filter(img2, StructuringRadius(r)), oracle::brute_median(img2, r));
    const Image img3 = oracle::random_image(Dims(7, 6, 5), rng, 0, 50);
    EXPECT_EQ(median_filter(img3, StructuringRadius(r)), oracle::brute_median(img3, r));
  }
}

TEST(Morphology, RadiusZeroIsIdentity) {
  const Image img = square(10, 3, 4);
  EXPECT_EQ(gray_erode(img, StructuringRadius(0)), img);
  EXPECT_EQ(gray_dilate(img, StructuringRadius(0)), img);
  EXPECT_EQ(binary_open(img, StructuringRadius(0)), img);
}

TEST(Morphology, OpeningRemovesSmallSquare) {
  const Image small = square(20, 8, 3);
  const Image opened = binary_open(small, StructuringRadius(2));
  for (float v : opened) EXPECT_EQ(v, 0.0f);
}

TEST(Morphology, OpeningRestoresLargeSquareInterior) {
  const Image big = square(21, 7, 7);
  const Image opened = binary_open(big, StructuringRadius(2));
  const Image expected =
      oracle::brute_morphology(oracle::brute_morphology(big, 2, false), 2, true);
  EXPECT_EQ(opened, expected);
  EXPECT_EQ(opened.at(10, 10), 1.0f);
  EXPECT_EQ(opened.at(10, 7), 1.0f);  // edge midpoints survive
  EXPECT_EQ(opened.at(7, 7), 0.0f);   // corners are rounded off
}

TEST(Morphology, MatchesBruteForceOnRandomImages) {
  std::mt19937_64 rng(4);
  for (int r = 1; r <= 3; ++r) {
    const Image img = oracle::random_image(Dims(9, 8, 6), rng, -5, 5);
    EXPECT_EQ(gray_erode(img, StructuringRadius(r)), oracle::brute_morphology(img, r, false));
    EXPECT_EQ(gray_dilate(img, StructuringRadius(r)), oracle::brute_morphology(img, r, true));
  }
}

TEST(Morphology, BinaryOpenRejectsNonBinary) {
  Image img(Dims(5, 5));
  img.at(2, 2) = 0.5f;
  EXPECT_THROW(binary_open(img, StructuringRadius(1)), ParameterError);
  EXPECT_THROW(StructuringRadius(-1), ParameterError);
}

TEST(PercentileRescale, RampMatchesSortOracle) {
  Image img(Dims(1000, 1));
  for (Index i = 0; i < 1000; ++i) img[i] = static_cast<float>(i);
  const double lo = oracle::sorted_percentile({img.begin(), img.end()}, 0.4);
  const double hi = oracle::sorted_percentile({img.begin(), img.end()}, 99.6);
  EXPECT_NEAR(percentile(img.data(), 0.4), lo, 1e-9);
  EXPECT_NEAR(percentile(img.data(), 99.6), hi, 1e-9);
  EXPECT_NEAR(lo, 3.996, 1e-9);
  EXPECT_NEAR(hi, 995.004, 1e-9);

  const Image out = percentile_rescale(img, 0.4, 99.6);
  for (Index i = 0; i < 1000; ++i) {
    const double expected = std::round(std::clamp(255.0 * (i - lo) / (hi - lo), 0.0, 255.0));
    EXPECT_EQ(out[i], expected) << "at " << i;
  }
  EXPECT_EQ(out[0], 0.0f);
  EXPECT_EQ(out[999], 255.0f);
  // Midpoint of the range maps to 127.5, rounded half away from zero.
  Image mid(Dims(3, 1));
  mid[0] = 0.0f;
  mid[1] = 5.0f;
  mid[2] = 10.0f;
  EXPECT_EQ(percentile_rescale(mid, 0.0, 100.0)[1], 128.0f);
}

TEST(PercentileRescale, ConstantImageWarnsAndZeroes) {
  std::string captured;
  auto previous = set_warning_handler([&](std::string_view m) { captured = m; });
  const Image out = percentile_rescale(Image(Dims(6, 6), 17.0f), 0.4, 99.6);
  set_warning_handler(previous);
  for (float v : out) EXPECT_EQ(v, 0.0f);
  EXPECT_NE(captured.find("degenerate"), std::string::npos);
}

TEST(PercentileRescale, AffineInvariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a_dist(0.1, 20.0), b_dist(-500, 500);
  for (int trial = 0; trial < 50; ++trial) {
    const Image img = oracle::random_image(Dims(20, 15), rng, 0, 300);
    const double a = a_dist(rng), b = b_dist(rng);
    Image moved = img;
    for (float& v : moved) v = static_cast<float>(a * v + b);
    const Image r1 = percentile_rescale(img, 0.4, 99.6);
    const Image r2 = percentile_rescale(moved, 0.4, 99.6);
    EXPECT_LE(max_abs_diff(r1, r2), 1.0f);
  }
}

TEST(PercentileRescale, RejectsBadRange) {
  const Image img(Dims(4, 4));
  EXPECT_THROW(percentile_rescale(img, 50, 50), ParameterError);
  EXPECT_THROW(percentile_rescale(img, -1, 50), ParameterError);
}

TEST(Sobel, ConstantIsZero) {
  for (float v : sobel_magnitude(Image(Dims(8, 8, 4), 3.0f))) EXPECT_EQ(v, 0.0f);
}

TEST(Sobel, StepEdgeMatchesDenseKernel) {
  Image img(Dims(16, 12));
  for (Index y = 0; y < 12; ++y)
    for (Index x = 8; x < 16; ++x) img.at(x, y) = 255.0f;
  const Image mag = sobel_magnitude(img);

  Image kx(Dims(3, 3)), ky(Dims(3, 3));
  const float d[3] = {-1, 0, 1}, s[3] = {1, 2, 1};
  for (Index y = 0; y < 3; ++y)
    for (Index x = 0; x < 3; ++x) {
      kx.at(x, y) = d[x] * s[y];
      ky.at(x, y) = s[x] * d[y];
    }
  const Image gx = oracle::dense_correlate(img, kx), gy = oracle::dense_correlate(img, ky);
  for (Index i = 0; i < img.size(); ++i) {
    EXPECT_NEAR(mag[i], std::hypot(gx[i], gy[i]), 1e-3);
  }
  // Peak response on the two columns flanking the edge, zero far away.
  EXPECT_FLOAT_EQ(mag.at(7, 5), 1020.0f);
  EXPECT_FLOAT_EQ(mag.at(8, 5), 1020.0f);
  EXPECT_EQ(mag.at(2, 5), 0.0f);
  EXPECT_EQ(mag.at(13, 5), 0.0f);
}

TEST(Sobel, DiskGivesRingResponse) {
  Image img(Dims(41, 41));
  for (Index y = 0; y < 41; ++y)
    for (Index x = 0; x < 41; ++x)
      if (std::hypot(x - 20.0, y - 20.0) <= 8.0) img.at(x, y) = 100.0f;
  const Image mag = sobel_magnitude(img);
  EXPECT_EQ(mag.at(20, 20), 0.0f);
  EXPECT_EQ(mag.at(2, 2), 0.0f);
  EXPECT_GT(mag.at(28, 20), 100.0f);
  EXPECT_GT(mag.at(20, 12), 100.0f);
}
