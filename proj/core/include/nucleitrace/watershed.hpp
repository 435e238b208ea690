#pragma once

#include "nucleitrace/image.hpp"

namespace nucleitrace {

/// Marker-controlled watershed by priority flooding.
///
/// Every seed voxel keeps its label. The remaining voxels are flooded in
/// ascending order of their flooding level, the minimax relief along the
/// path from a seed. A voxel is claimed by the first entry popped for it,
/// where entries order by (level, label, voxel index). Neighbors are
/// face-connected. No watershed lines are produced: with no mask, every voxel
/// ends up labeled.
///
/// When `mask` is given, voxels where mask == 0 are never flooded and stay 0.
/// Throws ParameterError on dims mismatch or when there are no seeds.
LabelImage seeded_watershed(const Image& relief, const LabelImage& seeds, const Mask* mask = nullptr);

}  // namespace nucleitrace
