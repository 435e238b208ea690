#include "nucleitrace/threshold.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "nucleitrace/errors.hpp"

namespace nucleitrace {
namespace {

constexpr int kBins = 256;

__extension__ using Int128 = __int128;

// Products stay below 2^127 while the sample is smaller than this.
constexpr std::int64_t kExactLimit = std::int64_t{1} << 18;

}  // namespace

int otsu_bin(double v, double lo, double hi) {
  const double t = (v - lo) / (hi - lo) * kBins;
  return std::clamp(static_cast<int>(std::floor(t)), 0, kBins - 1);
}

OtsuResult otsu_threshold(std::span<const float> values) {
  if (values.empty()) throw DegenerateHistogram("otsu_threshold: empty sample");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw DegenerateHistogram("otsu_threshold: degenerate histogram (constant input)");

  std::array<std::int64_t, kBins> hist{};
  for (float v : values) ++hist[static_cast<std::size_t>(otsu_bin(v, lo, hi))];

  const auto total = static_cast<std::int64_t>(values.size());
  std::int64_t total_sum = 0;
  for (int i = 0; i < kBins; ++i) total_sum += i * hist[static_cast<std::size_t>(i)];

  // Between-class variance up to a constant factor: (N*s0 - n0*S)^2 / (n0*n1),
  // with bin indices as class values.
  const bool exact = total < kExactLimit;
  int best = -1;
  Int128 best_num = 0, best_den = 1;
  long double best_ratio = -1.0L;
  std::int64_t n0 = 0, s0 = 0;
  for (int k = 0; k < kBins - 1; ++k) {
    n0 += hist[static_cast<std::size_t>(k)];
    s0 += k * hist[static_cast<std::size_t>(k)];
    const std::int64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const Int128 x = static_cast<Int128>(total) * s0 - static_cast<Int128>(n0) * total_sum;
    const Int128 num = x * x;
    const Int128 den = static_cast<Int128>(n0) * n1;
    if (exact) {
      if (best < 0 || num * best_den > best_num * den) {
        best = k;
        best_num = num;
        best_den = den;
      }
    } else {
      const long double ratio = static_cast<long double>(num) / static_cast<long double>(den);
      if (best < 0 || ratio > best_ratio) {
        best = k;
        best_ratio = ratio;
      }
    }
  }
  if (best < 0) throw DegenerateHistogram("otsu_threshold: degenerate histogram");

  // Threshold at the smallest sample value of the upper class, so that
  // v >= threshold holds exactly for the upper-class members.
  double threshold = std::numeric_limits<double>::infinity();
  for (float v : values) {
    if (otsu_bin(v, lo, hi) > best) threshold = std::min(threshold, static_cast<double>(v));
  }
  return {best, threshold};
}

}  // namespace nucleitrace
