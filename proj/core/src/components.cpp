#include "nucleitrace/components.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <queue>
#include <utility>

namespace nucleitrace {

LabelImage label_components(const Mask& mask, Connectivity conn, Label* count) {
  const Dims& dims = mask.dims();
  const auto offsets = neighbor_offsets(dims.ndim(), conn);
  LabelImage labels = like<Label>(mask);
  Label next = 0;
  std::deque<Index> queue;
  for (Index start = 0; start < mask.size(); ++start) {
    if (mask[start] == 0 || labels[start] != 0) continue;
    labels[start] = ++next;
    queue.push_back(start);
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      const auto [x, y, z] = dims.coords(v);
      for (const Offset& o : offsets) {
        if (!dims.contains(x + o.dx, y + o.dy, z + o.dz)) continue;
        const Index n = dims.index(x + o.dx, y + o.dy, z + o.dz);
        if (mask[n] == 0 || labels[n] != 0) continue;
        labels[n] = next;
        queue.push_back(n);
      }
    }
  }
  if (count != nullptr) *count = next;
  return labels;
}

Mask connected_threshold(const Image& img, const std::array<Index, 3>& seed, double lower) {
  const Dims& dims = img.dims();
  if (!dims.contains(seed[0], seed[1], seed[2])) throw ParameterError("connected_threshold: seed outside image");
  Mask out = like<std::uint8_t>(img);
  const Index s = dims.index(seed[0], seed[1], seed[2]);
  if (!(img[s] >= lower)) return out;
  const auto offsets = neighbor_offsets(dims.ndim(), Connectivity::kFace);
  std::deque<Index> queue{s};
  out[s] = 1;
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    const auto [x, y, z] = dims.coords(v);
    for (const Offset& o : offsets) {
      if (!dims.contains(x + o.dx, y + o.dy, z + o.dz)) continue;
      const Index n = dims.index(x + o.dx, y + o.dy, z + o.dz);
      if (out[n] != 0 || !(img[n] >= lower)) continue;
      out[n] = 1;
      queue.push_back(n);
    }
  }
  return out;
}

Image reconstruct_by_dilation(const Image& marker, const Image& mask) {
  if (marker.dims() != mask.dims()) throw ParameterError("reconstruct_by_dilation: dims mismatch");
  const Dims& dims = marker.dims();
  const auto offsets = neighbor_offsets(dims.ndim(), Connectivity::kFull);
  Image out = marker;
  using Entry = std::pair<float, Index>;
  std::priority_queue<Entry> heap;
  for (Index i = 0; i < out.size(); ++i) {
    out[i] = std::min(out[i], mask[i]);
    heap.emplace(out[i], i);
  }
  while (!heap.empty()) {
    const auto [value, v] = heap.top();
    heap.pop();
    if (value < out[v]) continue;
    const auto [x, y, z] = dims.coords(v);
    for (const Offset& o : offsets) {
      if (!dims.contains(x + o.dx, y + o.dy, z + o.dz)) continue;
      const Index n = dims.index(x + o.dx, y + o.dy, z + o.dz);
      const float candidate = std::min(value, mask[n]);
      if (candidate > out[n]) {
        out[n] = candidate;
        heap.emplace(candidate, n);
      }
    }
  }
  return out;
}

Mask regional_maxima(const Image& img, const Mask* restrict_to) {
  const Dims& dims = img.dims();
  const auto offsets = neighbor_offsets(dims.ndim(), Connectivity::kFull);
  auto inside = [&](Index i) { return restrict_to == nullptr || (*restrict_to)[i] != 0; };
  Mask out = like<std::uint8_t>(img);
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(img.size()), 0);
  std::vector<Index> plateau;
  for (Index start = 0; start < img.size(); ++start) {
    if (visited[static_cast<std::size_t>(start)] || !inside(start)) continue;
    const float value = img[start];
    bool is_max = true;
    plateau.assign(1, start);
    visited[static_cast<std::size_t>(start)] = 1;
    for (std::size_t head = 0; head < plateau.size(); ++head) {
      const auto [x, y, z] = dims.coords(plateau[head]);
      for (const Offset& o : offsets) {
        if (!dims.contains(x + o.dx, y + o.dy, z + o.dz)) continue;
        const Index n = dims.index(x + o.dx, y + o.dy, z + o.dz);
        if (!inside(n)) continue;
        if (img[n] > value) {
          is_max = false;
        } else if (img[n] == value && !visited[static_cast<std::size_t>(n)]) {
          visited[static_cast<std::size_t>(n)] = 1;
          plateau.push_back(n);
        }
      }
    }
    if (is_max) {
      for (Index v : plateau) out[v] = 1;
    }
  }
  return out;
}

}  // namespace nucleitrace
