#include "nucleitrace/track.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "nucleitrace/cluster.hpp"

namespace nucleitrace {

const Track& TrackGraph::at(Label id) const {
  const auto it = tracks_.find(id);
  if (it == tracks_.end()) throw ParameterError("unknown track id " + std::to_string(id));
  return it->second;
}

Track& TrackGraph::mutable_at(Label id) {
  const auto it = tracks_.find(id);
  if (it == tracks_.end()) throw ParameterError("unknown track id " + std::to_string(id));
  return it->second;
}

Label TrackGraph::add_track(int frame, const Point& centroid, std::vector<int> members, Label parent) {
  Track t;
  t.id = next_id_;
  t.start_frame = t.end_frame = frame;
  t.parent = parent;
  t.centroids.push_back(centroid);
  t.members.push_back(std::move(members));
  insert(std::move(t));
  return next_id_ - 1;
}

void TrackGraph::insert(Track track) {
  if (track.id == 0 || tracks_.count(track.id)) {
    throw ParameterError("track id " + std::to_string(track.id) + " is zero or already in use");
  }
  next_id_ = std::max(next_id_, track.id + 1);
  tracks_.emplace(track.id, std::move(track));
}

void TrackGraph::extend_backward(Label id, const Point& centroid, std::vector<int> members) {
  Track& t = mutable_at(id);
  if (t.start_frame == 0) throw InvariantError("track " + std::to_string(id) + " already starts at frame 0");
  --t.start_frame;
  t.centroids.insert(t.centroids.begin(), centroid);
  t.members.insert(t.members.begin(), std::move(members));
}

void TrackGraph::extend_forward(Label id, const Point& centroid, std::vector<int> members) {
  Track& t = mutable_at(id);
  ++t.end_frame;
  t.centroids.push_back(centroid);
  t.members.push_back(std::move(members));
}

void TrackGraph::set_parent(Label child, Label parent) {
  if (parent != 0) at(parent);
  mutable_at(child).parent = parent;
}

std::vector<Label> TrackGraph::children(Label id) const {
  std::vector<Label> out;
  for (const auto& [cid, t] : tracks_) {
    if (t.parent == id) out.push_back(cid);
  }
  return out;
}

std::vector<TrackedObject> TrackGraph::objects_at(int frame) const {
  std::vector<TrackedObject> out;
  for (const auto& [id, t] : tracks_) {
    if (!t.covers(frame)) continue;
    const auto k = static_cast<std::size_t>(frame - t.start_frame);
    out.push_back({id, frame, t.centroids[k], t.members[k]});
  }
  return out;
}

int TrackGraph::last_frame() const {
  int last = -1;
  for (const auto& [id, t] : tracks_) last = std::max(last, t.end_frame);
  return last;
}

TrackGraph TrackGraph::subset_with_descendants(const std::set<Label>& ids) const {
  std::set<Label> keep;
  std::vector<Label> stack(ids.begin(), ids.end());
  while (!stack.empty()) {
    const Label id = stack.back();
    stack.pop_back();
    if (!keep.insert(id).second) continue;
    for (Label c : children(id)) stack.push_back(c);
  }
  TrackGraph out;
  for (Label id : keep) {
    Track t = at(id);
    if (!keep.count(t.parent)) t.parent = 0;
    out.insert(std::move(t));
  }
  out.next_id_ = std::max(out.next_id_, next_id_);
  return out;
}

TrackGraph TrackGraph::relabeled() const {
  std::vector<const Track*> order;
  for (const auto& [id, t] : tracks_) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const Track* a, const Track* b) {
    return std::tie(a->start_frame, a->centroids.front(), a->id) < std::tie(b->start_frame, b->centroids.front(), b->id);
  });
  std::map<Label, Label> remap;
  for (std::size_t i = 0; i < order.size(); ++i) remap[order[i]->id] = static_cast<Label>(i + 1);
  TrackGraph out;
  for (const Track* t : order) {
    Track copy = *t;
    copy.id = remap.at(t->id);
    copy.parent = t->parent ? remap.at(t->parent) : 0;
    out.insert(std::move(copy));
  }
  return out;
}

void TrackGraph::validate() const {
  std::map<Label, int> child_count;
  for (const auto& [id, t] : tracks_) {
    const std::string name = "track " + std::to_string(id);
    if (id == 0 || t.id != id) throw InvariantError(name + ": id mismatch");
    if (t.start_frame < 0 || t.start_frame > t.end_frame) throw InvariantError(name + ": bad frame range");
    const auto len = static_cast<std::size_t>(t.end_frame - t.start_frame + 1);
    if (t.centroids.size() != len || t.members.size() != len) {
      throw InvariantError(name + ": centroid count does not match its frame range");
    }
    for (const Point& p : t.centroids) {
      for (double v : p) {
        if (!std::isfinite(v)) throw InvariantError(name + ": non-finite centroid");
      }
    }
    if (t.parent == 0) continue;
    const auto it = tracks_.find(t.parent);
    if (it == tracks_.end()) throw InvariantError(name + ": unknown parent " + std::to_string(t.parent));
    if (it->second.end_frame != t.start_frame - 1) {
      throw InvariantError(name + ": parent " + std::to_string(t.parent) + " does not end right before it starts");
    }
    ++child_count[t.parent];
  }
  for (const auto& [parent, n] : child_count) {
    if (n < 2) throw InvariantError("track " + std::to_string(parent) + " has a single child");
  }
}

namespace {

Point mean_of(const std::vector<Detection>& dets, const std::vector<int>& idx) {
  Point c{0, 0, 0};
  for (int i : idx) {
    for (std::size_t a = 0; a < 3; ++a) c[a] += dets[static_cast<std::size_t>(i)].centroid[a];
  }
  for (double& v : c) v /= double(idx.size());
  return c;
}

}  // namespace

LinkResult backward_link(const FrameDetections& frames, const LinkParams& params) {
  LinkResult res;
  const int T = static_cast<int>(frames.size());
  if (T == 0) return res;
  if (!params.cutoffs.empty() && static_cast<int>(params.cutoffs.size()) != T) {
    throw ParameterError("backward_link: need one cutoff per frame");
  }
  res.cutoffs.assign(static_cast<std::size_t>(T), 0.0);
  auto cutoff_for = [&](int t, const std::vector<Point>& points) {
    const double c =
        params.cutoffs.empty() ? adaptive_cutoff(points, params.fallback_cutoff) : params.cutoffs[std::size_t(t)];
    res.cutoffs[static_cast<std::size_t>(t)] = c;
    return c;
  };

  TrackGraph& g = res.graph;
  struct Live {
    Label id;
    Point centroid;
  };
  std::vector<Live> live;

  {
    const auto& dets = frames[static_cast<std::size_t>(T - 1)];
    std::vector<Point> points;
    for (const Detection& d : dets) points.push_back(d.centroid);
    // Doubling every point gives the cutoff the same composition as later
    // frames, where each object appears as a labeled copy plus a detection.
    std::vector<Point> doubled = points;
    doubled.insert(doubled.end(), points.begin(), points.end());
    const double cutoff = cutoff_for(T - 1, doubled);
    for (const auto& members : ward_cluster(points, cutoff).members()) {
      const Point c = mean_of(dets, members);
      live.push_back({g.add_track(T - 1, c, members), c});
    }
  }

  for (int t = T - 1; t >= 1; --t) {
    const auto& dets = frames[static_cast<std::size_t>(t - 1)];
    const int labeled = static_cast<int>(live.size());
    std::vector<Point> points;
    for (const Live& l : live) points.push_back(l.centroid);
    for (const Detection& d : dets) points.push_back(d.centroid);
    const double cutoff = cutoff_for(t - 1, points);

    std::vector<Live> next;
    for (const auto& cluster : ward_cluster(points, cutoff).members()) {
      std::vector<Label> ids;
      std::vector<int> members;
      for (int p : cluster) {
        if (p < labeled) {
          ids.push_back(live[static_cast<std::size_t>(p)].id);
        } else {
          members.push_back(p - labeled);
        }
      }
      // Labeled points alone: those tracks end at t.
      if (members.empty()) continue;
      const Point c = mean_of(dets, members);
      Label id = 0;
      if (ids.size() == 1) {
        id = ids.front();
        g.extend_backward(id, c, members);
      } else {
        id = g.add_track(t - 1, c, members);
        for (Label child : ids) g.set_parent(child, id);
      }
      next.push_back({id, c});
    }
    live = std::move(next);
  }

  res.graph = g.relabeled();
  return res;
}

TrackGraph forward_nn_gap_close(const TrackGraph& graph, const FrameDetections& frames,
                                const std::set<Label>& selected, std::span<const double> max_link_distance) {
  const int T = static_cast<int>(frames.size());
  if (static_cast<int>(max_link_distance.size()) != T) {
    throw ParameterError("forward_nn_gap_close: need one link distance per frame");
  }
  TrackGraph g = graph;
  std::vector<std::vector<bool>> owned(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) owned[t].assign(frames[t].size(), false);
  for (Label id : selected) {
    const Track& tr = g.at(id);
    for (int f = tr.start_frame; f <= tr.end_frame && f < T; ++f) {
      for (int m : tr.members[static_cast<std::size_t>(f - tr.start_frame)]) {
        owned[static_cast<std::size_t>(f)][static_cast<std::size_t>(m)] = true;
      }
    }
  }

  for (Label id : selected) {
    if (!g.children(id).empty()) continue;
    while (g.at(id).end_frame < T - 1) {
      const Track& tr = g.at(id);
      const auto next = static_cast<std::size_t>(tr.end_frame + 1);
      const Point& last = tr.centroids.back();
      int best = -1;
      double best_d = 0.0;
      for (std::size_t k = 0; k < frames[next].size(); ++k) {
        if (owned[next][k]) continue;
        const double d = distance(last, frames[next][k].centroid);
        if (d <= max_link_distance[next] && (best < 0 || d < best_d)) {
          best = static_cast<int>(k);
          best_d = d;
        }
      }
      if (best < 0) break;
      owned[next][static_cast<std::size_t>(best)] = true;
      g.extend_forward(id, frames[next][static_cast<std::size_t>(best)].centroid, {best});
    }
  }
  return g;
}

std::set<Label> select_tracks(const TrackGraph& graph, std::span<const Point> seeds, double radius) {
  std::set<Label> out;
  for (const auto& [id, t] : graph.tracks()) {
    if (t.start_frame != 0) continue;
    for (const Point& s : seeds) {
      if (distance(t.centroids.front(), s) <= radius) {
        out.insert(id);
        break;
      }
    }
  }
  return out;
}

std::array<double, 2> FlowField::sample(double x, double y) const {
  const Dims& d = dims();
  x = std::clamp(x, 0.0, double(d[0] - 1));
  y = std::clamp(y, 0.0, double(d[1] - 1));
  const Index x0 = static_cast<Index>(std::floor(x)), y0 = static_cast<Index>(std::floor(y));
  const Index x1 = std::min(x0 + 1, d[0] - 1), y1 = std::min(y0 + 1, d[1] - 1);
  const double fx = x - double(x0), fy = y - double(y0);
  auto lerp = [&](const Image& f) {
    const double top = (1 - fx) * f.at(x0, y0) + fx * f.at(x1, y0);
    const double bottom = (1 - fx) * f.at(x0, y1) + fx * f.at(x1, y1);
    return (1 - fy) * top + fy * bottom;
  };
  return {lerp(dx), lerp(dy)};
}

FrameDetections propagate_seeds(const FrameDetections& frames, std::span<const FlowField> forward,
                                std::span<const FlowField> backward, const Dims& dims) {
  if (dims.ndim() == 3) return frames;
  const std::size_t T = frames.size();
  if (T > 1 && (forward.size() + 1 < T || backward.size() + 1 < T)) {
    throw ParameterError("propagate_seeds: need a forward and a backward flow per frame pair");
  }
  FrameDetections out = frames;
  auto inside = [&](const Point& p) {
    return p[0] >= 0.0 && p[1] >= 0.0 && p[0] <= double(dims[0] - 1) && p[1] <= double(dims[1] - 1);
  };
  for (std::size_t t = 0; t < T; ++t) {
    for (const Detection& d : frames[t]) {
      if (t + 1 < T) {
        const auto v = forward[t].sample(d.centroid[0], d.centroid[1]);
        Detection c = d;
        c.frame = static_cast<int>(t + 1);
        c.centroid = {d.centroid[0] + v[0], d.centroid[1] + v[1], 0.0};
        c.origin = Origin::kPropagatedForward;
        if (inside(c.centroid)) out[t + 1].push_back(c);
      }
      if (t > 0) {
        const auto v = backward[t - 1].sample(d.centroid[0], d.centroid[1]);
        Detection c = d;
        c.frame = static_cast<int>(t - 1);
        c.centroid = {d.centroid[0] + v[0], d.centroid[1] + v[1], 0.0};
        c.origin = Origin::kPropagatedBackward;
        if (inside(c.centroid)) out[t - 1].push_back(c);
      }
    }
  }
  return out;
}

}  // namespace nucleitrace
