#include "nucleitrace/distance.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace nucleitrace {
namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas w2 * (p - q)^2 + f(q) along one line.
void distance_1d(const std::vector<double>& f, double w2, std::vector<double>& d, std::vector<Index>& v,
                 std::vector<double>& z) {
  const Index n = static_cast<Index>(f.size());
  auto at = [&](Index q) { return f[static_cast<std::size_t>(q)] + w2 * double(q) * double(q); };
  Index k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (Index q = 1; q < n; ++q) {
    auto intersect = [&] {
      const Index vk = v[static_cast<std::size_t>(k)];
      return (at(q) - at(vk)) / (2.0 * w2 * double(q - vk));
    };
    double s = intersect();
    // z[0] is -inf, so the loop always stops at k == 0.
    while (s <= z[static_cast<std::size_t>(k)]) {
      --k;
      s = intersect();
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k + 1)] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (Index q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k + 1)] < double(q)) ++k;
    const Index vk = v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] = w2 * double(q - vk) * double(q - vk) + f[static_cast<std::size_t>(vk)];
  }
}

}  // namespace

Image euclidean_distance_map(const LabelImage& foreground, bool use_spacing) {
  const Dims& dims = foreground.dims();
  std::vector<double> sq(static_cast<std::size_t>(foreground.size()));
  bool any = false;
  for (Index i = 0; i < foreground.size(); ++i) {
    const bool fg = foreground[i] != 0;
    any = any || fg;
    sq[static_cast<std::size_t>(i)] = fg ? 0.0 : kFar;
  }
  if (!any) throw DataError("euclidean_distance_map: no foreground");

  for (int axis = 0; axis < foreground.ndim(); ++axis) {
    const Index n = dims[axis];
    const Index stride = dims.stride(axis);
    const double w = use_spacing ? foreground.spacing()[static_cast<std::size_t>(axis)] : 1.0;
    const double w2 = w * w;
    std::vector<double> f(static_cast<std::size_t>(n)), d(f.size()), z(f.size() + 1);
    std::vector<Index> v(f.size());
    const int a1 = axis == 0 ? 1 : 0;
    const int a2 = axis == 2 ? 1 : 2;
    for (Index j = 0; j < dims[a2]; ++j) {
      for (Index i = 0; i < dims[a1]; ++i) {
        const Index base = i * dims.stride(a1) + j * dims.stride(a2);
        for (Index q = 0; q < n; ++q) f[static_cast<std::size_t>(q)] = sq[static_cast<std::size_t>(base + q * stride)];
        distance_1d(f, w2, d, v, z);
        for (Index q = 0; q < n; ++q) sq[static_cast<std::size_t>(base + q * stride)] = d[static_cast<std::size_t>(q)];
      }
    }
  }

  Image out(dims, 0.0f, foreground.spacing());
  for (Index i = 0; i < out.size(); ++i) out[i] = static_cast<float>(std::sqrt(sq[static_cast<std::size_t>(i)]));
  return out;
}

}  // namespace nucleitrace
