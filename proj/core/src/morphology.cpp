#include "nucleitrace/morphology.hpp"

#include <algorithm>

namespace nucleitrace {
namespace {

template <typename Pick>
Image ball_filter(const Image& img, int r, Pick pick) {
  if (r == 0) return img;
  const auto ball = ball_offsets(img.ndim(), r);
  const Dims& dims = img.dims();
  Image out = like<float>(img);
  for (Index z = 0; z < dims[2]; ++z) {
    for (Index y = 0; y < dims[1]; ++y) {
      for (Index x = 0; x < dims[0]; ++x) {
        float v = img.at(x, y, z);
        for (const Offset& o : ball) v = pick(v, img.clamped(x + o.dx, y + o.dy, z + o.dz));
        out.at(x, y, z) = v;
      }
    }
  }
  return out;
}

}  // namespace

Image gray_erode(const Image& img, StructuringRadius r) {
  return ball_filter(img, r.value(), [](float a, float b) { return std::min(a, b); });
}

Image gray_dilate(const Image& img, StructuringRadius r) {
  return ball_filter(img, r.value(), [](float a, float b) { return std::max(a, b); });
}

Image binary_open(const Image& img, StructuringRadius r) {
  for (float v : img) {
    if (v != 0.0f && v != 1.0f) throw ParameterError("binary_open: input must be {0,1}-valued");
  }
  return gray_dilate(gray_erode(img, r), r);
}

}  // namespace nucleitrace
