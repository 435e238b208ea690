#pragma once

#include <span>
#include <vector>

#include "nucleitrace/image.hpp"

namespace nucleitrace {

/// Sampled, unit-sum Gaussian kernel truncated at ceil(4 sigma). sigma == 0
/// yields the identity kernel {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Correlates one axis with an odd-length kernel, clamp-to-edge borders.
Image convolve_axis(const Image& img, int axis, std::span<const double> kernel);

/// Separable Gaussian smoothing; one sigma per image axis, in voxels.
Image gaussian_filter(const Image& img, std::span<const double> sigma);
Image gaussian_filter(const Image& img, double sigma);

/// Median over the clamped (2r+1)^d box neighborhood.
Image median_filter(const Image& img, StructuringRadius r);

/// Percentile of a sample using linear interpolation between order
/// statistics: position p/100 * (n - 1) in the sorted sample.
double percentile(std::span<const float> values, double p);

/// Linear map of [percentile(p_low), percentile(p_high)] onto [0, 255],
/// clamped, rounded half away from zero. A degenerate range yields zeros and
/// a warning.
Image percentile_rescale(const Image& img, double p_low, double p_high);

/// Euclidean norm of the per-axis Sobel derivatives.
Image sobel_magnitude(const Image& img);

/// Affine map of the value range onto [0, 1]; constant images map to 0.
Image normalize_minmax(const Image& img);

}  // namespace nucleitrace
