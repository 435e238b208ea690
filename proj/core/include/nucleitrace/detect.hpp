#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nucleitrace/image.hpp"

namespace nucleitrace {

enum class Origin : std::uint8_t {
  kDetected,
  kPropagatedForward,   // copied from frame t-1 along the forward flow
  kPropagatedBackward,  // copied from frame t+1 along the backward flow
};

/// One candidate nucleus centroid in one frame.
struct Detection {
  int frame = 0;
  Point centroid{0, 0, 0};
  double score = 0.0;  // scale-space response at the maximum
  double scale = 0.0;  // sigma of the strongest response
  Origin origin = Origin::kDetected;

  bool operator==(const Detection&) const = default;
};

/// Uniformly spaced LoG scales between sigma_min and sigma_max.
struct ScaleRange {
  double sigma_min = 5.0;
  double sigma_max = 5.0;
  int steps = 1;

  /// Integer sigma steps: steps = floor(sigma_max - sigma_min) + 1.
  static ScaleRange integer_steps(double sigma_min, double sigma_max);

  void validate() const;
  std::vector<double> sigmas() const;
  bool operator==(const ScaleRange&) const = default;
};

/// Scale-normalized Laplacian of Gaussian, sign-flipped so bright blobs give
/// positive peaks: -sum_a sigma_a^2 d^2/dx_a^2 (G_sigma * img), with the
/// second derivatives taken as [1 -2 1] central differences after Gaussian
/// smoothing. One sigma per axis.
Image log_filter(const Image& img, std::span<const double> sigma);

struct ScaleSpaceProjection {
  Image response;                          // voxel-wise max over all scales
  Raster<std::uint16_t> scale_index;       // argmax scale, lowest index on ties
  std::vector<double> sigmas;
};

/// Maximum projection of the LoG stack over `scales`. `axis_factor`
/// multiplies sigma per axis (used to compensate anisotropic voxels).
ScaleSpaceProjection logssmp(const Image& img, const ScaleRange& scales,
                             const std::array<double, 3>& axis_factor = {1.0, 1.0, 1.0});

/// Local maxima with plateau handling.
///
/// Voxels are grouped into connected sets of equal value (full
/// connectivity). A set whose outside neighbors are all strictly lower is a
/// maximum and yields exactly one detection at the mean of its voxel
/// coordinates, scored with its value. Isolated strict maxima are the
/// single-voxel case. Results are in voxel index order of each set's first
/// voxel; `scale` is left at 0.
std::vector<Detection> find_maxima(const Image& response, int frame = 0);

/// Keeps detections scoring strictly above mean + k * std of `response`
/// (population statistics over all voxels).
std::vector<Detection> threshold_detections(std::span<const Detection> dets, const Image& response,
                                            double k = 2.0);

/// Splits touching blobs of a binary mask. The distance to background is
/// computed inside the mask; regional maxima of that map after suppressing
/// peaks of dynamic below `h` become markers, and a watershed on the negated
/// map, restricted to the mask, assigns every foreground voxel to one of them.
LabelImage split_clumped_seeds(const LabelImage& mask, double h = 1.0);

/// Drops detections whose centroid lies within `margin` voxels of any image
/// border along x, y (and z for 3D). A centroid on the border touches it, so
/// margin 0 still drops it.
std::vector<Detection> remove_border_detections(std::span<const Detection> dets, const Dims& dims,
                                                double margin);

struct PreprocessStep {
  enum class Kind { kGaussian, kMedian, kErode };
  Kind kind = Kind::kGaussian;
  double value = 0.0;   // sigma for Gaussian, radius otherwise
  int first_frame = 0;  // inclusive
  int last_frame = -1;  // inclusive; -1 = open ended

  bool applies_to(int frame) const { return frame >= first_frame && (last_frame < 0 || frame <= last_frame); }
  bool operator==(const PreprocessStep&) const = default;
};

std::string to_string(PreprocessStep::Kind kind);
PreprocessStep::Kind preprocess_kind_from_string(const std::string& name);

struct DetectParams {
  ScaleRange scales;
  std::vector<PreprocessStep> preprocess;
  double threshold_k = 2.0;
  double border_margin = 0.0;
  bool anisotropic = false;  // scale sigma_z by spacing_x / spacing_z

  // 2D mask chain
  double rescale_low = 0.4;
  double rescale_high = 99.6;
  int opening_radius = 2;
  double binarize_threshold = 0.5;
  double clump_h = 1.0;

  bool operator==(const DetectParams&) const = default;
};

/// Applies the preprocessing steps that are active for `frame`.
Image preprocess_frame(const Image& img, std::span<const PreprocessStep> steps, int frame);

/// Full per-frame detection.
///
/// Both modes: preprocess, scale-space projection, plateau-aware maxima and
/// the mean + k std threshold. 2D frames additionally run the mask chain:
/// the percentile-rescaled frame feeds the projection, whose response is
/// min-max normalized, binarized at `binarize_threshold` and opened; clumps
/// are split and each resulting seed region that contains at least one
/// thresholded maximum becomes one detection at the region centroid. Finally
/// border detections are removed and the list is sorted by centroid.
std::vector<Detection> detect_frame(const Image& img, const DetectParams& params, int frame = 0);

}  // namespace nucleitrace
