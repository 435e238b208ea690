#pragma once

#include <map>
#include <set>
#include <span>
#include <vector>

#include "nucleitrace/detect.hpp"
#include "nucleitrace/image.hpp"

namespace nucleitrace {

using FrameDetections = std::vector<std::vector<Detection>>;

/// One tracked object in one frame.
struct TrackedObject {
  Label track_id = 0;
  int frame = 0;
  Point centroid{0, 0, 0};
  std::vector<int> members;  // indices into that frame's detection list

  bool operator==(const TrackedObject&) const = default;
};

struct Track {
  Label id = 0;
  int start_frame = 0;
  int end_frame = 0;
  Label parent = 0;               // 0 if none
  std::vector<Point> centroids;   // one per frame in [start_frame, end_frame]
  std::vector<std::vector<int>> members;

  const Point& centroid_at(int frame) const { return centroids[static_cast<std::size_t>(frame - start_frame)]; }
  bool covers(int frame) const { return frame >= start_frame && frame <= end_frame; }
  bool operator==(const Track&) const = default;
};

/// Lineage forest of tracks with contiguous per-frame centroids.
class TrackGraph {
 public:
  const std::map<Label, Track>& tracks() const { return tracks_; }
  std::size_t size() const { return tracks_.size(); }
  bool empty() const { return tracks_.empty(); }
  bool contains(Label id) const { return tracks_.count(id) != 0; }
  const Track& at(Label id) const;

  /// New single-frame track with a fresh id.
  Label add_track(int frame, const Point& centroid, std::vector<int> members, Label parent = 0);
  /// Inserts a fully formed track (id must be unused and nonzero).
  void insert(Track track);

  /// Prepends frame start_frame - 1.
  void extend_backward(Label id, const Point& centroid, std::vector<int> members);
  /// Appends frame end_frame + 1.
  void extend_forward(Label id, const Point& centroid, std::vector<int> members);
  void set_parent(Label child, Label parent);

  std::vector<Label> children(Label id) const;
  /// Objects present in `frame`, ordered by track id.
  std::vector<TrackedObject> objects_at(int frame) const;
  int last_frame() const;

  /// The listed tracks plus all their descendants.
  TrackGraph subset_with_descendants(const std::set<Label>& ids) const;

  /// Ids renumbered from 1 in (start_frame, first centroid, old id) order.
  TrackGraph relabeled() const;

  /// Throws InvariantError if any lineage or extent rule is broken.
  void validate() const;

  bool operator==(const TrackGraph&) const = default;

 private:
  Track& mutable_at(Label id);

  std::map<Label, Track> tracks_;
  Label next_id_ = 1;
};

struct LinkParams {
  /// Per-frame clustering cutoff; empty means adaptive per frame.
  std::vector<double> cutoffs;
  /// Used by the adaptive cutoff when a frame has fewer than 4 points.
  double fallback_cutoff = 10.0;
};

struct LinkResult {
  TrackGraph graph;
  std::vector<double> cutoffs;  // cutoff used when clustering each frame
};

/// Backward clustering tracker.
///
/// The last frame is clustered on its own and every cluster opens a track;
/// its adaptive cutoff is computed with every detection counted twice.
/// Then, for t from the last frame down to 1, the objects of frame t are
/// copied to t-1 as labeled points and clustered together with the
/// detections of t-1. Per cluster:
///  - no labeled point: a new track starts at t-1;
///  - one labeled point and some detections: that track extends to t-1;
///  - two or more labeled points and some detections: a new track starts at
///    t-1 and becomes the parent of each labeled track (a division);
///  - labeled points only: those tracks end at t.
/// The object at t-1 is the mean of the cluster's detections of t-1.
/// Finally ids are renumbered (see TrackGraph::relabeled).
LinkResult backward_link(const FrameDetections& frames, const LinkParams& params);

/// Extends selected tracks that end before the last frame, one frame at a
/// time, to the nearest detection of the next frame within
/// `max_link_distance[t + 1]` that no other selected track owns. Tracks are
/// processed by ascending id; ties go to the lower detection index. Tracks
/// that already have children are left alone.
TrackGraph forward_nn_gap_close(const TrackGraph& graph, const FrameDetections& frames,
                                const std::set<Label>& selected, std::span<const double> max_link_distance);

/// Tracks whose frame-0 centroid lies within `radius` of one of `seeds`.
std::set<Label> select_tracks(const TrackGraph& graph, std::span<const Point> seeds, double radius);

/// Dense 2D displacement field, in voxels.
struct FlowField {
  Image dx;
  Image dy;

  FlowField() = default;
  explicit FlowField(const Dims& dims) : dx(dims), dy(dims) {}

  const Dims& dims() const { return dx.dims(); }
  /// Bilinear sample, clamped to the field.
  std::array<double, 2> sample(double x, double y) const;
};

/// Copies every detection of frame t to t+1 along `forward[t]` and to t-1
/// along `backward[t-1]` (`forward[t]` maps t to t+1, `backward[t]` maps t+1
/// to t). Copies outside `dims` are dropped. 3D frames are returned
/// unchanged.
FrameDetections propagate_seeds(const FrameDetections& frames, std::span<const FlowField> forward,
                                std::span<const FlowField> backward, const Dims& dims);

}  // namespace nucleitrace
