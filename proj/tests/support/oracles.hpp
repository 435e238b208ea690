#pragma once

// Slow, direct reference implementations used to check the library. None of
// these call into the code paths they are compared against.

#include <random>
#include <span>
#include <vector>

#include "nucleitrace/image.hpp"

namespace oracle {

using nucleitrace::Dims;
using nucleitrace::Image;
using nucleitrace::Index;
using nucleitrace::LabelImage;
using nucleitrace::Mask;
using nucleitrace::Point;

/// Full (non-separable) convolution with the product Gaussian kernel,
/// truncated at ceil(4 sigma) per axis, clamp-to-edge.
Image dense_gaussian(const Image& img, std::span<const double> sigma);

/// Negated scale-normalized Laplacian of the dense Gaussian: second
/// differences [1 -2 1] per axis weighted by sigma^2.
Image dense_log(const Image& img, std::span<const double> sigma);

/// Plateau maxima by exhaustive search: each voxel's equal-valued component
/// (full connectivity) is grown from scratch and kept if no exterior neighbor
/// is >= its value. Returns the distinct plateau centroids, sorted.
std::vector<Point> brute_maxima(const Image& img);

/// Direct convolution with an explicit dense kernel (odd extents, centered).
Image dense_correlate(const Image& img, const Image& kernel);

/// Min or max over all voxels at Euclidean offset <= r, clamp-to-edge.
Image brute_morphology(const Image& img, int r, bool take_max);

/// Per-voxel sort of the clamped (2r+1)^d box.
Image brute_median(const Image& img, int r);

/// Nearest-foreground scan; distances computed in double, stored as float.
Image brute_distance(const LabelImage& fg);

/// Exhaustive split search over 256 bins with exact rational comparison.
int exhaustive_otsu_bin(std::span<const float> values);

/// Sorted-sample percentile with linear interpolation.
double sorted_percentile(std::vector<float> values, double p);

/// Quadratic-time flooding: repeatedly claims the globally smallest
/// (level, label, index) candidate adjacent to the labeled region.
LabelImage naive_watershed(const Image& relief, const LabelImage& seeds, const Mask* mask = nullptr);

/// Depth-first flood fill over face neighbors with value >= lower.
Mask flood_fill(const Image& img, Index seed, double lower);

struct Merge {
  int a, b;  // cluster ids (smallest member index) merged
  double height;
};

struct Agglomeration {
  std::vector<int> assignment;  // cluster index per point, clusters ordered by smallest member
  std::vector<Merge> merges;
};

/// Ward clustering by recomputing every pairwise cluster distance from the
/// member coordinates at every step. Stops once the smallest distance exceeds
/// `cutoff`.
Agglomeration naive_ward(const std::vector<Point>& points, double cutoff);

/// Distances from each point to its k-th nearest neighbors by full sort.
double brute_adaptive_cutoff(const std::vector<Point>& points, double fallback);

Image random_image(const Dims& dims, std::mt19937_64& rng, float lo, float hi);

}  // namespace oracle
