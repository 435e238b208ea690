#pragma once

#include "nucleitrace/image.hpp"
#include "nucleitrace/track.hpp"

namespace nucleitrace {

struct FlowParams {
  int levels = 3;          // pyramid levels including the full resolution
  double pyr_scale = 0.5;  // size ratio between consecutive levels
  int iterations = 3;      // displacement updates per level
  int winsize = 15;        // averaging window size
  int poly_n = 5;          // polynomial expansion radius
  double poly_sigma = 1.1; // applicability std

  void validate() const;
  bool operator==(const FlowParams&) const = default;
};

/// Local quadratic model f(x) ~ x'Ax + b'x + c per pixel.
struct PolyExpansion {
  Image a11, a22, a12, b1, b2;
};

/// Weighted least-squares fit of {1, x, y, x^2, y^2, xy} over a
/// (2 poly_n + 1)^2 window with Gaussian applicability.
PolyExpansion poly_expand(const Image& img, int poly_n, double poly_sigma);

/// Dense two-frame motion by polynomial expansion, coarse to fine. The
/// result maps `prev` onto `next`: prev(x) ~ next(x + d(x)). 2D only.
FlowField farneback_flow(const Image& prev, const Image& next, const FlowParams& params = {});

}  // namespace nucleitrace
