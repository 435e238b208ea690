#pragma once

#include "nucleitrace/image.hpp"

namespace nucleitrace {

/// Exact Euclidean distance from every voxel to the nearest nonzero voxel of
/// `foreground` (separable lower-envelope transform). Distances are in voxels
/// unless `use_spacing` is set, in which case each axis is weighted by the
/// raster's spacing. Throws DataError when there is no foreground.
Image euclidean_distance_map(const LabelImage& foreground, bool use_spacing = false);

}  // namespace nucleitrace
