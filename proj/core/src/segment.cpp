#include "nucleitrace/segment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "nucleitrace/components.hpp"
#include "nucleitrace/diagnostics.hpp"
#include "nucleitrace/distance.hpp"
#include "nucleitrace/filters.hpp"
#include "nucleitrace/threshold.hpp"
#include "nucleitrace/watershed.hpp"

namespace nucleitrace {

void SizePriors::validate() const {
  if (!(r_min > 0.0 && r_min <= r_max)) throw ParameterError("size priors need 0 < r_min <= r_max");
  if (!(a_max > 0.0)) throw ParameterError("size priors need a_max > 0");
}

namespace {

Point voxel_point(const std::array<Index, 3>& v) { return {double(v[0]), double(v[1]), double(v[2])}; }

// True if a claim by (d, id) beats the current (best_d, best_id).
bool nearer(double d, Label id, double best_d, Label best_id) { return d < best_d || (d == best_d && id < best_id); }

}  // namespace

LabelImage segment_2d(const Image& raw, std::span<const TrackedObject> objects, const SizePriors& priors,
                      double sigma_smooth, double sobel_weight) {
  priors.validate();
  if (raw.ndim() != 2) throw ParameterError("segment_2d: 2D frames only");
  LabelImage out = like<Label>(raw);
  if (objects.empty()) return out;

  // Flooding labels: the background marker is 1 so it wins equal-level ties
  // on object outlines; objects follow in track id order.
  constexpr Label kBackground = 1;
  std::map<Label, Label> flood_label;
  for (const TrackedObject& o : objects) {
    if (o.track_id == 0) throw ParameterError("segment_2d: track id 0");
    flood_label[o.track_id] = 0;
  }
  std::vector<Label> track_of{0, 0};
  for (auto& [id, l] : flood_label) {
    l = static_cast<Label>(track_of.size());
    track_of.push_back(id);
  }

  const Dims& dims = raw.dims();
  LabelImage points = like<Label>(raw);
  for (const TrackedObject& o : objects) {
    const auto v = nearest_voxel(dims, o.centroid);
    points.at(v[0], v[1], v[2]) = 1;
  }
  const Image dist = euclidean_distance_map(points);

  LabelImage markers = like<Label>(raw);
  for (Index i = 0; i < raw.size(); ++i) {
    if (dist[i] > priors.r_max) markers[i] = kBackground;
  }
  std::vector<double> owner_d(static_cast<std::size_t>(raw.size()), 0.0);
  const auto ball = ball_offsets(2, static_cast<int>(std::floor(priors.r_min)));
  for (const TrackedObject& o : objects) {
    const auto c = nearest_voxel(dims, o.centroid);
    for (const Offset& off : ball) {
      const Index x = c[0] + off.dx, y = c[1] + off.dy;
      if (!dims.contains(x, y)) continue;
      const Index i = dims.index(x, y);
      const double d = distance(o.centroid, {double(x), double(y), 0.0});
      Label& m = markers[i];
      if (m == kBackground) continue;
      if (m == 0 || nearer(d, o.track_id, owner_d[std::size_t(i)], track_of[m])) {
        m = flood_label.at(o.track_id);
        owner_d[std::size_t(i)] = d;
      }
    }
  }

  Image smooth = gaussian_filter(raw, sigma_smooth);
  for (float& v : smooth) v = -v;
  const Image a = normalize_minmax(smooth);
  const Image b = normalize_minmax(sobel_magnitude(raw));
  Image relief = like<float>(raw);
  for (Index i = 0; i < raw.size(); ++i) relief[i] = static_cast<float>(a[i] + sobel_weight * b[i]);

  const LabelImage flooded = seeded_watershed(relief, markers);
  std::map<Label, double> area;
  for (Index i = 0; i < raw.size(); ++i) {
    out[i] = track_of[flooded[i]];
    if (out[i]) area[out[i]] += 1.0;
  }
  for (Label& l : out) {
    if (l != 0 && area[l] > priors.a_max) l = 0;
  }
  return out;
}

CropMask segment_3d_crop(const Image& raw, const TrackedObject& object, double halfwidth, double r_min) {
  if (!(halfwidth > 0.0)) throw ParameterError("segment_3d_crop: halfwidth must be > 0");
  if (!(r_min > 0.0)) throw ParameterError("segment_3d_crop: r_min must be > 0");
  const Dims& dims = raw.dims();
  const auto c = nearest_voxel(dims, object.centroid);
  const Index h = static_cast<Index>(std::ceil(halfwidth));

  CropMask out;
  out.track_id = object.track_id;
  out.centroid = object.centroid;
  std::array<Index, 3> hi{};
  for (int a = 0; a < 3; ++a) {
    const auto k = static_cast<std::size_t>(a);
    const Index ha = a < dims.ndim() ? h : 0;
    out.offset[k] = std::max<Index>(0, c[k] - ha);
    hi[k] = std::min<Index>(dims[a] - 1, c[k] + ha);
  }
  const Dims cd = dims.ndim() == 3 ? Dims(hi[0] - out.offset[0] + 1, hi[1] - out.offset[1] + 1, hi[2] - out.offset[2] + 1)
                                   : Dims(hi[0] - out.offset[0] + 1, hi[1] - out.offset[1] + 1);
  Image crop(cd, 0.0f, raw.spacing());
  for (Index z = 0; z < cd[2]; ++z)
    for (Index y = 0; y < cd[1]; ++y)
      for (Index x = 0; x < cd[0]; ++x) crop.at(x, y, z) = raw.at(x + out.offset[0], y + out.offset[1], z + out.offset[2]);
  const std::array<Index, 3> seed{c[0] - out.offset[0], c[1] - out.offset[1], c[2] - out.offset[2]};
  out.mask = Mask(cd);

  const std::string who = "track " + std::to_string(object.track_id);
  double threshold = 0.0;
  try {
    threshold = otsu_threshold(crop.data()).threshold;
  } catch (const DegenerateHistogram&) {
    warn(who + ": constant crop, using a ball of radius r_min");
    const double r2 = r_min * r_min;
    for (Index i = 0; i < crop.size(); ++i) {
      out.mask[i] = squared_distance(voxel_point(cd.coords(i)), voxel_point(seed)) <= r2;
    }
    return out;
  }
  const float seed_value = crop.at(seed[0], seed[1], seed[2]);
  if (seed_value < threshold) {
    warn(who + ": centroid voxel is below the Otsu threshold, lowering it to the centroid value");
    threshold = seed_value;
  }
  const Mask component = connected_threshold(crop, seed, threshold);

  Image relief = crop;
  for (float& v : relief) v = -v;
  LabelImage markers(cd);
  constexpr Label kObject = 1, kShell = 2;
  for (Index i = 0; i < crop.size(); ++i) {
    const auto v = cd.coords(i);
    for (int a = 0; a < cd.ndim(); ++a) {
      if (v[std::size_t(a)] == 0 || v[std::size_t(a)] == cd[a] - 1) markers[i] = kShell;
    }
  }
  markers.at(seed[0], seed[1], seed[2]) = kObject;
  const LabelImage ws = seeded_watershed(relief, markers, &component);
  for (Index i = 0; i < crop.size(); ++i) out.mask[i] = ws[i] == kObject;
  return out;
}

LabelImage combine_crops(std::span<const CropMask> crops, const Dims& dims) {
  LabelImage out(dims);
  std::vector<double> owner_d(static_cast<std::size_t>(out.size()), 0.0);
  for (const CropMask& crop : crops) {
    const Dims& cd = crop.mask.dims();
    for (Index i = 0; i < crop.mask.size(); ++i) {
      if (!crop.mask[i]) continue;
      const auto v = cd.coords(i);
      const Index x = v[0] + crop.offset[0], y = v[1] + crop.offset[1], z = v[2] + crop.offset[2];
      if (!dims.contains(x, y, z)) throw ParameterError("combine_crops: crop exceeds the frame");
      const Index j = dims.index(x, y, z);
      const double d = distance(crop.centroid, {double(x), double(y), double(z)});
      if (out[j] == 0 || nearer(d, crop.track_id, owner_d[std::size_t(j)], out[j])) {
        out[j] = crop.track_id;
        owner_d[std::size_t(j)] = d;
      }
    }
  }
  return out;
}

LabelImage z_project_resize(const LabelImage& seg, Index z_out) {
  if (seg.ndim() != 3) throw ParameterError("z_project_resize: 3D input required");
  if (z_out < 1) throw ParameterError("z_project_resize: z_out must be >= 1");
  const Dims& d = seg.dims();
  LabelImage out(Dims(d[0], d[1], z_out), 0, seg.spacing());
  for (Index y = 0; y < d[1]; ++y) {
    for (Index x = 0; x < d[0]; ++x) {
      Label m = 0;
      for (Index z = 0; z < d[2]; ++z) m = std::max(m, seg.at(x, y, z));
      for (Index z = 0; z < z_out; ++z) out.at(x, y, z) = m;
    }
  }
  return out;
}

LabelImage enforce_consistency(const LabelImage& seg, std::span<const TrackedObject> objects, double r_min) {
  if (!(r_min >= 0.0)) throw ParameterError("enforce_consistency: r_min must be >= 0");
  LabelImage out = seg;
  const Dims& dims = seg.dims();
  std::map<Label, Index> count;
  for (Label l : out) {
    if (l) ++count[l];
  }
  const auto ball = ball_offsets(dims.ndim(), static_cast<int>(std::floor(r_min)));
  for (const TrackedObject& o : objects) {
    if (o.track_id == 0) throw ParameterError("enforce_consistency: track id 0");
    if (count[o.track_id] > 0) continue;
    const auto c = nearest_voxel(dims, o.centroid);
    for (const Offset& off : ball) {
      const Index x = c[0] + off.dx, y = c[1] + off.dy, z = c[2] + off.dz;
      if (!dims.contains(x, y, z) || out.at(x, y, z) != 0) continue;
      out.at(x, y, z) = o.track_id;
      ++count[o.track_id];
    }
    if (count[o.track_id] > 0) continue;

    // Fully occluded: take the closest voxel whose owner can spare it.
    Index best = -1;
    double best_d = 0.0;
    for (Index i = 0; i < out.size(); ++i) {
      const Label owner = out[i];
      if (owner != 0 && count[owner] < 2) continue;
      const double d = squared_distance(voxel_point(dims.coords(i)), voxel_point(c));
      if (best < 0 || d < best_d) {
        best = i;
        best_d = d;
      }
      if (d == 0.0) break;
    }
    if (best < 0) throw InvariantError("enforce_consistency: no voxel left for track " + std::to_string(o.track_id));
    if (out[best]) --count[out[best]];
    out[best] = o.track_id;
    ++count[o.track_id];
  }
  return out;
}

}  // namespace nucleitrace
