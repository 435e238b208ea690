#pragma once

#include "nucleitrace/image.hpp"

namespace nucleitrace {

// Voxel centers are aligned: output voxel i samples input coordinate
// (i + 0.5) * in / out - 0.5. Spacing is scaled so the physical extent is kept.

/// Linear interpolation (bi-/trilinear), clamp-to-edge.
Image resize(const Image& img, const Dims& new_dims);

/// Nearest-neighbor resampling; never invents label values.
LabelImage resize_labels(const LabelImage& labels, const Dims& new_dims);

}  // namespace nucleitrace
