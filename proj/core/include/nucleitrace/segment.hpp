#pragma once

#include <array>
#include <span>
#include <vector>

#include "nucleitrace/image.hpp"
#include "nucleitrace/track.hpp"

namespace nucleitrace {

/// Expected object size, in voxels.
struct SizePriors {
  double r_min = 3.0;
  double r_max = 15.0;
  double a_max = 1000.0;  // area (2D) or volume (3D)

  void validate() const;
  bool operator==(const SizePriors&) const = default;
};

/// Global seeded watershed for one 2D frame.
///
/// Markers are the objects' centroid voxels dilated by r_min (overlaps go to
/// the nearest centroid, then the lower id) plus a background marker where
/// the distance to every centroid voxel exceeds r_max, which wins ties on
/// equal flooding levels. The relief is
/// normalize(-gaussian(raw, sigma_smooth)) + sobel_weight *
/// normalize(sobel(raw)). The background and every segment larger than a_max
/// are set to 0; remaining labels are track ids.
LabelImage segment_2d(const Image& raw, std::span<const TrackedObject> objects, const SizePriors& priors,
                      double sigma_smooth = 2.0, double sobel_weight = 1.0);

/// Binary mask of one object inside a box of the full frame.
struct CropMask {
  Label track_id = 0;
  Point centroid{0, 0, 0};
  std::array<Index, 3> offset{0, 0, 0};  // crop origin in the frame
  Mask mask;
};

/// Crop-local segmentation of one object.
///
/// The crop spans ceil(halfwidth) voxels around the centroid voxel on every
/// axis, clamped to the frame. Otsu's threshold of the crop drives a
/// face-connected region growing from the centroid voxel. A seeded
/// watershed on the inverted crop, restricted to that component, with the
/// object at the centroid and a background marker on the crop's outer
/// shell, keeps the voxels won by the object. A constant crop falls back to
/// a ball of radius r_min; a centroid voxel below the threshold lowers the
/// threshold to its value. Both cases warn.
CropMask segment_3d_crop(const Image& raw, const TrackedObject& object, double halfwidth, double r_min);

/// Pastes crop masks into one label image. A voxel claimed by several crops
/// goes to the nearest centroid, then the lower track id.
LabelImage combine_crops(std::span<const CropMask> crops, const Dims& dims);

/// Per-(x, y) maximum label over z, replicated into z_out slices.
LabelImage z_project_resize(const LabelImage& seg, Index z_out);

/// Makes every listed object own at least one voxel. A missing object gets a
/// ball of radius r_min at its centroid voxel, written over background only;
/// if that adds nothing it takes the centroid voxel, or failing that the
/// nearest voxel whose current owner keeps at least one other voxel.
LabelImage enforce_consistency(const LabelImage& seg, std::span<const TrackedObject> objects, double r_min);

}  // namespace nucleitrace
