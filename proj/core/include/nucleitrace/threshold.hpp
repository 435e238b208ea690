#pragma once

#include <span>

namespace nucleitrace {

struct OtsuResult {
  int bin;           // last histogram bin of the lower class, in [0, 254]
  double threshold;  // values >= threshold belong to the upper class
};

/// Otsu's threshold over a 256-bin histogram spanning [min, max] of the
/// sample. The between-class variance is compared exactly in integer
/// arithmetic and ties resolve to the lowest bin. Throws DegenerateHistogram
/// when all values are equal.
OtsuResult otsu_threshold(std::span<const float> values);

/// Histogram bin of `v` for a sample spanning [lo, hi] (hi > lo).
int otsu_bin(double v, double lo, double hi);

}  // namespace nucleitrace
