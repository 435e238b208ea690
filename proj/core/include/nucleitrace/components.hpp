#pragma once

#include <array>
#include <vector>

#include "nucleitrace/image.hpp"

namespace nucleitrace {

/// Labels connected components of the nonzero voxels, 1..n in order of
/// first voxel index. Returns the label image; `count` receives n.
LabelImage label_components(const Mask& mask, Connectivity conn, Label* count = nullptr);

/// Connected-threshold region growing: the set of voxels with value >=
/// `lower` that are face-connected to `seed`. Empty when the seed itself is
/// below the threshold.
Mask connected_threshold(const Image& img, const std::array<Index, 3>& seed, double lower);

/// Morphological reconstruction by dilation of `marker` under `mask`
/// (marker <= mask voxel-wise), full connectivity.
Image reconstruct_by_dilation(const Image& marker, const Image& mask);

/// Regional maxima: connected plateaus (full connectivity) whose outside
/// neighbors are all strictly lower. Voxels with `restrict_to` == 0 are
/// ignored when given.
Mask regional_maxima(const Image& img, const Mask* restrict_to = nullptr);

}  // namespace nucleitrace
