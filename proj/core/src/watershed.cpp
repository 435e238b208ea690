#include "nucleitrace/watershed.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <tuple>
#include <vector>

namespace nucleitrace {
namespace {

enum : std::uint8_t { kOpen = 0, kSeedPending = 1, kDone = 2 };

}  // namespace

LabelImage seeded_watershed(const Image& relief, const LabelImage& seeds, const Mask* mask) {
  if (relief.dims() != seeds.dims()) throw ParameterError("seeded_watershed: relief and seeds differ in dims");
  if (mask != nullptr && mask->dims() != seeds.dims()) {
    throw ParameterError("seeded_watershed: mask and seeds differ in dims");
  }
  const Dims& dims = relief.dims();
  const auto offsets = neighbor_offsets(dims.ndim(), Connectivity::kFace);
  auto inside = [&](Index i) { return mask == nullptr || (*mask)[i] != 0; };

  using Entry = std::tuple<float, Label, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  LabelImage labels = like<Label>(seeds);
  std::vector<std::uint8_t> state(static_cast<std::size_t>(seeds.size()), kOpen);

  bool any = false;
  for (Index i = 0; i < seeds.size(); ++i) {
    if (seeds[i] == 0 || !inside(i)) continue;
    any = true;
    labels[i] = seeds[i];
    state[static_cast<std::size_t>(i)] = kSeedPending;
    heap.emplace(relief[i], seeds[i], i);
  }
  if (!any) throw ParameterError("seeded_watershed: no seeds");

  while (!heap.empty()) {
    const auto [level, label, v] = heap.top();
    heap.pop();
    auto& st = state[static_cast<std::size_t>(v)];
    if (st == kDone) continue;
    if (st == kOpen) labels[v] = label;
    st = kDone;

    const auto [x, y, z] = dims.coords(v);
    for (const Offset& o : offsets) {
      const Index nx = x + o.dx, ny = y + o.dy, nz = z + o.dz;
      if (!dims.contains(nx, ny, nz)) continue;
      const Index n = dims.index(nx, ny, nz);
      if (state[static_cast<std::size_t>(n)] != kOpen || !inside(n)) continue;
      heap.emplace(std::max(level, relief[n]), label, n);
    }
  }
  return labels;
}

}  // namespace nucleitrace
