#include "nucleitrace/detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nucleitrace/components.hpp"
#include "nucleitrace/distance.hpp"
#include "nucleitrace/filters.hpp"
#include "nucleitrace/morphology.hpp"
#include "nucleitrace/watershed.hpp"

namespace nucleitrace {

ScaleRange ScaleRange::integer_steps(double sigma_min, double sigma_max) {
  ScaleRange r{sigma_min, sigma_max, static_cast<int>(std::floor(sigma_max - sigma_min)) + 1};
  r.validate();
  return r;
}

void ScaleRange::validate() const {
  if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min)) {
    throw ParameterError("scale range needs 0 < sigma_min <= sigma_max");
  }
  if (steps < 1) throw ParameterError("scale range needs at least one step");
  if (steps == 1 && sigma_min != sigma_max) {
    throw ParameterError("a single-step scale range needs sigma_min == sigma_max");
  }
}

std::vector<double> ScaleRange::sigmas() const {
  validate();
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) {
    out.push_back(steps == 1 ? sigma_min : sigma_min + (sigma_max - sigma_min) * i / (steps - 1));
  }
  return out;
}

Image log_filter(const Image& img, std::span<const double> sigma) {
  for (double s : sigma) {
    if (!(s > 0.0)) throw ParameterError("log_filter: sigma must be > 0");
  }
  const Image smooth = gaussian_filter(img, sigma);
  const Dims& dims = smooth.dims();
  Image out = like<float>(img);
  for (Index z = 0; z < dims[2]; ++z) {
    for (Index y = 0; y < dims[1]; ++y) {
      for (Index x = 0; x < dims[0]; ++x) {
        const double c = smooth.at(x, y, z);
        double lap = sigma[0] * sigma[0] * (double(smooth.clamped(x - 1, y, z)) - 2.0 * c + smooth.clamped(x + 1, y, z));
        lap += sigma[1] * sigma[1] * (double(smooth.clamped(x, y - 1, z)) - 2.0 * c + smooth.clamped(x, y + 1, z));
        if (dims.ndim() == 3) {
          lap += sigma[2] * sigma[2] * (double(smooth.clamped(x, y, z - 1)) - 2.0 * c + smooth.clamped(x, y, z + 1));
        }
        out.at(x, y, z) = static_cast<float>(-lap);
      }
    }
  }
  return out;
}

ScaleSpaceProjection logssmp(const Image& img, const ScaleRange& scales, const std::array<double, 3>& axis_factor) {
  ScaleSpaceProjection proj;
  proj.sigmas = scales.sigmas();
  proj.scale_index = like<std::uint16_t>(img);
  std::vector<double> sigma(static_cast<std::size_t>(img.ndim()));
  for (std::size_t s = 0; s < proj.sigmas.size(); ++s) {
    for (std::size_t a = 0; a < sigma.size(); ++a) sigma[a] = proj.sigmas[s] * axis_factor[a];
    Image response = log_filter(img, sigma);
    if (s == 0) {
      proj.response = std::move(response);
      continue;
    }
    for (Index i = 0; i < img.size(); ++i) {
      if (response[i] > proj.response[i]) {
        proj.response[i] = response[i];
        proj.scale_index[i] = static_cast<std::uint16_t>(s);
      }
    }
  }
  return proj;
}

std::vector<Detection> find_maxima(const Image& response, int frame) {
  const Dims& dims = response.dims();
  const auto offsets = neighbor_offsets(dims.ndim(), Connectivity::kFull);
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(response.size()), 0);
  std::vector<Index> plateau;
  std::vector<Detection> out;

  auto dominates_neighbors = [&](Index v) {
    const auto [x, y, z] = dims.coords(v);
    for (const Offset& o : offsets) {
      if (!dims.contains(x + o.dx, y + o.dy, z + o.dz)) continue;
      if (response.at(x + o.dx, y + o.dy, z + o.dz) > response[v]) return false;
    }
    return true;
  };

  for (Index start = 0; start < response.size(); ++start) {
    if (visited[static_cast<std::size_t>(start)]) continue;
    // Only a voxel that is >= all its neighbors can belong to a maximal plateau.
    if (!dominates_neighbors(start)) continue;
    const float value = response[start];
    bool is_max = true;
    plateau.assign(1, start);
    visited[static_cast<std::size_t>(start)] = 1;
    for (std::size_t head = 0; head < plateau.size(); ++head) {
      const auto [x, y, z] = dims.coords(plateau[head]);
      for (const Offset& o : offsets) {
        if (!dims.contains(x + o.dx, y + o.dy, z + o.dz)) continue;
        const Index n = dims.index(x + o.dx, y + o.dy, z + o.dz);
        if (response[n] > value) {
          is_max = false;
        } else if (response[n] == value && !visited[static_cast<std::size_t>(n)]) {
          visited[static_cast<std::size_t>(n)] = 1;
          plateau.push_back(n);
        }
      }
    }
    if (!is_max) continue;
    Point c{0, 0, 0};
    for (Index v : plateau) {
      const auto p = dims.coords(v);
      for (std::size_t a = 0; a < 3; ++a) c[a] += double(p[a]);
    }
    for (double& x : c) x /= double(plateau.size());
    out.push_back({frame, c, double(value), 0.0, Origin::kDetected});
  }
  return out;
}

std::vector<Detection> threshold_detections(std::span<const Detection> dets, const Image& response, double k) {
  if (dets.empty()) return {};
  double mean = 0.0;
  for (float v : response) mean += v;
  mean /= double(response.size());
  double var = 0.0;
  for (float v : response) var += (v - mean) * (v - mean);
  const double threshold = mean + k * std::sqrt(var / double(response.size()));
  std::vector<Detection> out;
  for (const Detection& d : dets) {
    if (d.score > threshold) out.push_back(d);
  }
  return out;
}

LabelImage split_clumped_seeds(const LabelImage& mask, double h) {
  if (h < 0.0) throw ParameterError("split_clumped_seeds: h must be >= 0");
  Mask fg = like<std::uint8_t>(mask);
  LabelImage background = like<Label>(mask);
  bool any_fg = false, any_bg = false;
  for (Index i = 0; i < mask.size(); ++i) {
    fg[i] = mask[i] != 0;
    background[i] = mask[i] == 0;
    any_fg = any_fg || fg[i];
    any_bg = any_bg || background[i];
  }
  if (!any_fg) return like<Label>(mask);
  if (!any_bg) return label_components(fg, Connectivity::kFace);

  const Image dist = euclidean_distance_map(background);
  Image lowered = dist;
  for (float& v : lowered) v = static_cast<float>(v - h);
  const Image domes = reconstruct_by_dilation(lowered, dist);
  const Mask peaks = regional_maxima(domes, &fg);
  const LabelImage markers = label_components(peaks, Connectivity::kFull);

  Image relief = dist;
  for (float& v : relief) v = -v;
  LabelImage out = seeded_watershed(relief, markers, &fg);

  // Face-disconnected leftovers (only diagonally attached to a marked part)
  // become objects of their own.
  Mask rest = like<std::uint8_t>(mask);
  bool any_rest = false;
  for (Index i = 0; i < mask.size(); ++i) {
    rest[i] = fg[i] && out[i] == 0;
    any_rest = any_rest || rest[i];
  }
  if (any_rest) {
    Label next = *std::max_element(out.begin(), out.end());
    const LabelImage extra = label_components(rest, Connectivity::kFace);
    for (Index i = 0; i < mask.size(); ++i) {
      if (extra[i]) out[i] = next + extra[i];
    }
  }
  return out;
}

std::vector<Detection> remove_border_detections(std::span<const Detection> dets, const Dims& dims, double margin) {
  if (margin < 0.0) throw ParameterError("remove_border_detections: margin must be >= 0");
  std::vector<Detection> out;
  for (const Detection& d : dets) {
    bool keep = true;
    for (int a = 0; a < dims.ndim(); ++a) {
      const double c = d.centroid[static_cast<std::size_t>(a)];
      if (c <= margin || c >= double(dims[a] - 1) - margin) keep = false;
    }
    if (keep) out.push_back(d);
  }
  return out;
}

std::string to_string(PreprocessStep::Kind kind) {
  switch (kind) {
    case PreprocessStep::Kind::kGaussian:
      return "gaussian";
    case PreprocessStep::Kind::kMedian:
      return "median";
    case PreprocessStep::Kind::kErode:
      return "erode";
  }
  return "unknown";
}

PreprocessStep::Kind preprocess_kind_from_string(const std::string& name) {
  if (name == "gaussian") return PreprocessStep::Kind::kGaussian;
  if (name == "median") return PreprocessStep::Kind::kMedian;
  if (name == "erode") return PreprocessStep::Kind::kErode;
  throw ParameterError("unknown preprocessing step '" + name + "' (expected gaussian, median or erode)");
}

Image preprocess_frame(const Image& img, std::span<const PreprocessStep> steps, int frame) {
  Image out = img;
  for (const PreprocessStep& step : steps) {
    if (!step.applies_to(frame)) continue;
    switch (step.kind) {
      case PreprocessStep::Kind::kGaussian:
        out = gaussian_filter(out, step.value);
        break;
      case PreprocessStep::Kind::kMedian:
        out = median_filter(out, StructuringRadius(static_cast<int>(step.value)));
        break;
      case PreprocessStep::Kind::kErode:
        out = gray_erode(out, StructuringRadius(static_cast<int>(step.value)));
        break;
    }
  }
  return out;
}

namespace {

std::vector<Detection> seed_regions(const ScaleSpaceProjection& proj, std::span<const Detection> maxima,
                                    const DetectParams& params, int frame) {
  const Image& response = proj.response;
  // Like a probability map, the rectified response is 0 away from nuclei.
  Image rectified = response;
  for (float& v : rectified) v = std::max(v, 0.0f);
  const Image normalized = normalize_minmax(rectified);
  Image binary = like<float>(response);
  for (Index i = 0; i < response.size(); ++i) binary[i] = normalized[i] >= params.binarize_threshold ? 1.0f : 0.0f;
  // Thresholding commutes with flat openings, so opening the binary map
  // equals binarizing the opened response.
  const Image opened = binary_open(binary, StructuringRadius(params.opening_radius));
  LabelImage mask = like<Label>(response);
  for (Index i = 0; i < response.size(); ++i) mask[i] = opened[i] > 0.5f;
  const LabelImage regions = split_clumped_seeds(mask, params.clump_h);

  // Strongest supporting maximum per region.
  std::map<Label, Detection> support;
  for (const Detection& m : maxima) {
    const auto v = nearest_voxel(response.dims(), m.centroid);
    const Label r = regions.at(v[0], v[1], v[2]);
    if (r == 0) continue;
    auto [it, inserted] = support.try_emplace(r, m);
    if (!inserted && m.score > it->second.score) it->second = m;
  }
  if (support.empty()) return {};

  std::map<Label, std::pair<Point, Index>> sums;
  for (Index i = 0; i < regions.size(); ++i) {
    const Label r = regions[i];
    if (r == 0 || !support.count(r)) continue;
    auto& [sum, n] = sums[r];
    const auto c = regions.dims().coords(i);
    for (std::size_t a = 0; a < 3; ++a) sum[a] += double(c[a]);
    ++n;
  }
  std::vector<Detection> out;
  for (const auto& [r, best] : support) {
    const auto& [sum, n] = sums.at(r);
    Detection d = best;
    d.frame = frame;
    for (std::size_t a = 0; a < 3; ++a) d.centroid[a] = sum[a] / double(n);
    out.push_back(d);
  }
  return out;
}

}  // namespace

std::vector<Detection> detect_frame(const Image& img, const DetectParams& params, int frame) {
  params.scales.validate();
  Image pre = preprocess_frame(img, params.preprocess, frame);
  const bool planar = img.ndim() == 2;
  if (planar) pre = percentile_rescale(pre, params.rescale_low, params.rescale_high);

  std::array<double, 3> factor{1.0, 1.0, 1.0};
  if (params.anisotropic && !planar) factor[2] = img.spacing()[0] / img.spacing()[2];
  const ScaleSpaceProjection proj = logssmp(pre, params.scales, factor);

  std::vector<Detection> maxima = find_maxima(proj.response, frame);
  for (Detection& d : maxima) {
    const auto v = nearest_voxel(img.dims(), d.centroid);
    d.scale = proj.sigmas[proj.scale_index.at(v[0], v[1], v[2])];
  }
  std::vector<Detection> dets = threshold_detections(maxima, proj.response, params.threshold_k);
  if (planar) dets = seed_regions(proj, dets, params, frame);
  dets = remove_border_detections(dets, img.dims(), params.border_margin);

  std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.centroid != b.centroid) return a.centroid < b.centroid;
    return a.score > b.score;
  });
  return dets;
}

}  // namespace nucleitrace
