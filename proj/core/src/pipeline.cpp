#include "nucleitrace/pipeline.hpp"

#include <set>
#include <string>

#include "nucleitrace/parallel.hpp"

namespace nucleitrace {

void prepare_frames(std::vector<Image>& frames, const PipelineConfig& config) {
  const int ndim = config.mode == Mode::k2D ? 2 : 3;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].ndim() != ndim) {
      throw DataError("frame " + std::to_string(t) + " is " + std::to_string(frames[t].ndim()) + "D but " +
                      config.name + " expects " + std::to_string(ndim) + "D data");
    }
    frames[t].set_spacing(config.spacing);
  }
}

FrameDetections detect_sequence(const std::vector<Image>& frames, const PipelineConfig& config, int threads) {
  FrameDetections out(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t t) { out[t] = detect_frame(frames[t], config.detect, int(t)); });
  return out;
}

TrackingOutput track_sequence(const std::vector<Image>& frames, const FrameDetections& detections,
                              const PipelineConfig& config, const std::vector<Point>& selected_seeds, int threads) {
  if (detections.empty()) throw DataError("tracking needs at least one frame");
  FrameDetections linked = detections;
  if (config.flow_enabled && config.mode == Mode::k2D && detections.size() > 1) {
    if (frames.size() != detections.size()) throw DataError("flow propagation needs the raw frames");
    const std::size_t pairs = frames.size() - 1;
    std::vector<FlowField> forward(pairs), backward(pairs);
    parallel_for(2 * pairs, threads, [&](std::size_t k) {
      const std::size_t t = k / 2;
      if (k % 2 == 0) {
        forward[t] = farneback_flow(frames[t], frames[t + 1], config.flow);
      } else {
        backward[t] = farneback_flow(frames[t + 1], frames[t], config.flow);
      }
    });
    linked = propagate_seeds(detections, forward, backward, frames.front().dims());
  }

  LinkParams params;
  params.fallback_cutoff = config.effective_fallback_cutoff();
  LinkResult link = backward_link(linked, params);
  TrackingOutput out{std::move(link.graph), std::move(link.cutoffs)};

  std::set<Label> selected;
  if (!selected_seeds.empty()) {
    selected = select_tracks(out.graph, selected_seeds, out.cutoffs.front());
  } else {
    for (const auto& [id, t] : out.graph.tracks()) selected.insert(id);
  }
  if (config.gap_closing) {
    std::vector<double> max_link(out.cutoffs.size());
    for (std::size_t t = 0; t < max_link.size(); ++t) max_link[t] = config.gap_cutoff_factor * out.cutoffs[t];
    out.graph = forward_nn_gap_close(out.graph, linked, selected, max_link);
  }
  if (!selected_seeds.empty()) out.graph = out.graph.subset_with_descendants(selected).relabeled();
  out.graph.validate();
  return out;
}

void check_mask(const LabelImage& mask, const std::vector<TrackedObject>& objects, int frame) {
  std::set<Label> active, seen;
  for (const TrackedObject& o : objects) active.insert(o.track_id);
  for (Label l : mask) {
    if (l) seen.insert(l);
  }
  const std::string where = "frame " + std::to_string(frame) + ": ";
  for (Label l : seen) {
    if (!active.count(l)) throw InvariantError(where + "label " + std::to_string(l) + " is not an active track");
  }
  for (Label l : active) {
    if (!seen.count(l)) throw InvariantError(where + "track " + std::to_string(l) + " has no voxels");
  }
}

std::vector<LabelImage> segment_sequence(const std::vector<Image>& frames, const ObjectTable& objects,
                                         const PipelineConfig& config, int threads) {
  if (objects.frames.size() != frames.size()) {
    throw DataError("objects cover " + std::to_string(objects.frames.size()) + " frames, the sequence has " +
                    std::to_string(frames.size()));
  }
  std::vector<LabelImage> out(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t t) {
    const Image& raw = frames[t];
    const auto& objs = objects.frames[t];
    LabelImage seg;
    if (raw.ndim() == 2) {
      seg = segment_2d(raw, objs, config.priors, config.sigma_smooth, config.sobel_weight);
    } else {
      std::vector<CropMask> crops;
      crops.reserve(objs.size());
      for (const TrackedObject& o : objs) crops.push_back(segment_3d_crop(raw, o, objects.cutoffs[t], config.priors.r_min));
      seg = combine_crops(crops, raw.dims());
      if (config.z_projection) seg = z_project_resize(seg, raw.dims()[2]);
    }
    seg = enforce_consistency(seg, objs, config.priors.r_min);
    check_mask(seg, objs, int(t));
    out[t] = std::move(seg);
  });
  return out;
}

}  // namespace nucleitrace
