#include "nucleitrace/resize.hpp"

#include <algorithm>
#include <cmath>

namespace nucleitrace {
namespace {

struct Tap {
  Index i0, i1;
  double w1;  // weight of i1
};

std::vector<Tap> linear_taps(Index in, Index out) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  const double scale = double(in) / double(out);
  for (Index i = 0; i < out; ++i) {
    const double src = std::clamp((double(i) + 0.5) * scale - 0.5, 0.0, double(in - 1));
    const auto i0 = static_cast<Index>(std::floor(src));
    const Index i1 = std::min(i0 + 1, in - 1);
    taps[static_cast<std::size_t>(i)] = {i0, i1, src - double(i0)};
  }
  return taps;
}

std::vector<Index> nearest_taps(Index in, Index out) {
  std::vector<Index> taps(static_cast<std::size_t>(out));
  const double scale = double(in) / double(out);
  for (Index i = 0; i < out; ++i) {
    taps[static_cast<std::size_t>(i)] =
        std::clamp<Index>(static_cast<Index>(std::floor((double(i) + 0.5) * scale)), 0, in - 1);
  }
  return taps;
}

Spacing scaled_spacing(const Spacing& s, const Dims& from, const Dims& to) {
  Spacing out = s;
  for (int a = 0; a < 3; ++a) {
    out[static_cast<std::size_t>(a)] *= double(from[a]) / double(to[a]);
  }
  return out;
}

void check(const Dims& from, const Dims& to) {
  if (to.ndim() != from.ndim()) throw ParameterError("resize: dimensionality must not change");
}

}  // namespace

Image resize(const Image& img, const Dims& new_dims) {
  check(img.dims(), new_dims);
  if (new_dims == img.dims()) return img;
  const Dims& d = img.dims();
  const auto tx = linear_taps(d[0], new_dims[0]);
  const auto ty = linear_taps(d[1], new_dims[1]);
  const auto tz = linear_taps(d[2], new_dims[2]);
  Image out(new_dims, 0.0f, scaled_spacing(img.spacing(), d, new_dims));
  for (Index z = 0; z < new_dims[2]; ++z) {
    const Tap& cz = tz[static_cast<std::size_t>(z)];
    for (Index y = 0; y < new_dims[1]; ++y) {
      const Tap& cy = ty[static_cast<std::size_t>(y)];
      for (Index x = 0; x < new_dims[0]; ++x) {
        const Tap& cx = tx[static_cast<std::size_t>(x)];
        auto row = [&](Index yy, Index zz) {
          return (1.0 - cx.w1) * img.at(cx.i0, yy, zz) + cx.w1 * img.at(cx.i1, yy, zz);
        };
        auto plane = [&](Index zz) { return (1.0 - cy.w1) * row(cy.i0, zz) + cy.w1 * row(cy.i1, zz); };
        out.at(x, y, z) = static_cast<float>((1.0 - cz.w1) * plane(cz.i0) + cz.w1 * plane(cz.i1));
      }
    }
  }
  return out;
}

LabelImage resize_labels(const LabelImage& labels, const Dims& new_dims) {
  check(labels.dims(), new_dims);
  if (new_dims == labels.dims()) return labels;
  const Dims& d = labels.dims();
  const auto tx = nearest_taps(d[0], new_dims[0]);
  const auto ty = nearest_taps(d[1], new_dims[1]);
  const auto tz = nearest_taps(d[2], new_dims[2]);
  LabelImage out(new_dims, 0, scaled_spacing(labels.spacing(), d, new_dims));
  for (Index z = 0; z < new_dims[2]; ++z) {
    for (Index y = 0; y < new_dims[1]; ++y) {
      for (Index x = 0; x < new_dims[0]; ++x) {
        out.at(x, y, z) = labels.at(tx[static_cast<std::size_t>(x)], ty[static_cast<std::size_t>(y)],
                                    tz[static_cast<std::size_t>(z)]);
      }
    }
  }
  return out;
}

}  // namespace nucleitrace
