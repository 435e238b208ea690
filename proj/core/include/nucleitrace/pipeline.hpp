#pragma once

#include <vector>

#include "nucleitrace/config.hpp"
#include "nucleitrace/text_io.hpp"

namespace nucleitrace {

/// Applies the spacing and mode of `config` to the frames and checks that
/// they agree (2D frames for a 2D configuration and so on).
void prepare_frames(std::vector<Image>& frames, const PipelineConfig& config);

/// detect_frame on every frame.
FrameDetections detect_sequence(const std::vector<Image>& frames, const PipelineConfig& config, int threads = 1);

struct TrackingOutput {
  TrackGraph graph;
  std::vector<double> cutoffs;  // clustering cutoff per frame
};

/// Optional flow propagation (2D), backward linking, then optional forward
/// gap closing. With `selected_seeds`, only tracks starting near a seed in
/// frame 0 and their descendants are kept, and ids are renumbered.
TrackingOutput track_sequence(const std::vector<Image>& frames, const FrameDetections& detections,
                              const PipelineConfig& config, const std::vector<Point>& selected_seeds = {},
                              int threads = 1);

/// Per-frame segmentation of the tracked objects followed by the
/// consistency pass. Throws InvariantError if a mask holds a label that is
/// not an active track or misses an active track.
std::vector<LabelImage> segment_sequence(const std::vector<Image>& frames, const ObjectTable& objects,
                                         const PipelineConfig& config, int threads = 1);

/// The checks segment_sequence applies to each frame.
void check_mask(const LabelImage& mask, const std::vector<TrackedObject>& objects, int frame);

}  // namespace nucleitrace
