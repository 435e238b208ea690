#include "nucleitrace/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nucleitrace/diagnostics.hpp"

namespace nucleitrace {
namespace {

// Calls fn(base_index) for every 1D line running along `axis`.
template <typename Fn>
void for_each_line(const Dims& dims, int axis, Fn&& fn) {
  const int a1 = axis == 0 ? 1 : 0;
  const int a2 = axis == 2 ? 1 : 2;
  for (Index j = 0; j < dims[a2]; ++j) {
    for (Index i = 0; i < dims[a1]; ++i) {
      fn(i * dims.stride(a1) + j * dims.stride(a2));
    }
  }
}

void check_sigma(const Image& img, std::span<const double> sigma) {
  if (img.empty()) throw ParameterError("gaussian_filter: empty image");
  if (static_cast<int>(sigma.size()) != img.ndim()) {
    throw ParameterError("gaussian_filter: got " + std::to_string(sigma.size()) + " sigmas for a " +
                         std::to_string(img.ndim()) + "D image");
  }
  for (double s : sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ParameterError("gaussian_filter: sigma must be >= 0");
  }
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma >= 0.0)) throw ParameterError("gaussian_kernel: sigma must be >= 0");
  if (sigma == 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

Image convolve_axis(const Image& img, int axis, std::span<const double> kernel) {
  if (kernel.size() % 2 == 0) throw ParameterError("convolve_axis: kernel length must be odd");
  if (axis < 0 || axis >= img.ndim()) throw ParameterError("convolve_axis: axis out of range");
  if (kernel.size() == 1 && kernel[0] == 1.0) return img;

  const Dims& dims = img.dims();
  const Index n = dims[axis];
  const Index stride = dims.stride(axis);
  const Index radius = static_cast<Index>(kernel.size() / 2);
  Image out = like<float>(img);
  std::vector<double> line(static_cast<std::size_t>(n));

  for_each_line(dims, axis, [&](Index base) {
    for (Index i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = img[base + i * stride];
    for (Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (Index k = -radius; k <= radius; ++k) {
        const Index src = std::clamp<Index>(i + k, 0, n - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * line[static_cast<std::size_t>(src)];
      }
      out[base + i * stride] = static_cast<float>(acc);
    }
  });
  return out;
}

Image gaussian_filter(const Image& img, std::span<const double> sigma) {
  check_sigma(img, sigma);
  Image out = img;
  for (int axis = 0; axis < img.ndim(); ++axis) {
    const double s = sigma[static_cast<std::size_t>(axis)];
    if (s == 0.0) continue;
    out = convolve_axis(out, axis, gaussian_kernel(s));
  }
  return out;
}

Image gaussian_filter(const Image& img, double sigma) {
  const std::vector<double> s(static_cast<std::size_t>(img.ndim()), sigma);
  return gaussian_filter(img, s);
}

Image median_filter(const Image& img, StructuringRadius r) {
  const int rad = r.value();
  if (rad == 0) return img;
  const Dims& dims = img.dims();
  const Index zr = img.ndim() == 3 ? rad : 0;
  Image out = like<float>(img);
  std::vector<float> window;
  window.reserve(static_cast<std::size_t>((2 * rad + 1) * (2 * rad + 1) * (2 * zr + 1)));

  for (Index z = 0; z < dims[2]; ++z) {
    for (Index y = 0; y < dims[1]; ++y) {
      for (Index x = 0; x < dims[0]; ++x) {
        window.clear();
        for (Index dz = -zr; dz <= zr; ++dz) {
          for (Index dy = -rad; dy <= rad; ++dy) {
            for (Index dx = -rad; dx <= rad; ++dx) window.push_back(img.clamped(x + dx, y + dy, z + dz));
          }
        }
        auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
        std::nth_element(window.begin(), mid, window.end());
        out.at(x, y, z) = *mid;
      }
    }
  }
  return out;
}

double percentile(std::span<const float> values, double p) {
  if (values.empty()) throw ParameterError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw ParameterError("percentile must lie in [0, 100]");
  std::vector<float> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return static_cast<double>(sorted[lo]) + frac * (static_cast<double>(sorted[hi]) - sorted[lo]);
}

Image percentile_rescale(const Image& img, double p_low, double p_high) {
  if (!(p_low >= 0.0 && p_low < p_high && p_high <= 100.0)) {
    throw ParameterError("percentile_rescale: need 0 <= p_low < p_high <= 100");
  }
  const double v_low = percentile(img.data(), p_low);
  const double v_high = percentile(img.data(), p_high);
  Image out = like<float>(img);
  if (!(v_high > v_low)) {
    warn("percentile_rescale: degenerate intensity range, output set to zero");
    return out;
  }
  const double scale = 255.0 / (v_high - v_low);
  for (Index i = 0; i < img.size(); ++i) {
    const double v = std::clamp((img[i] - v_low) * scale, 0.0, 255.0);
    out[i] = static_cast<float>(std::round(v));
  }
  return out;
}

Image sobel_magnitude(const Image& img) {
  static constexpr double kDerivative[] = {-1.0, 0.0, 1.0};
  static constexpr double kSmooth[] = {1.0, 2.0, 1.0};
  const int nd = img.ndim();
  std::vector<double> sum_sq(static_cast<std::size_t>(img.size()), 0.0);
  for (int axis = 0; axis < nd; ++axis) {
    Image g = img;
    for (int other = 0; other < nd; ++other) {
      g = convolve_axis(g, other, other == axis ? std::span<const double>(kDerivative)
                                                : std::span<const double>(kSmooth));
    }
    for (Index i = 0; i < img.size(); ++i) sum_sq[static_cast<std::size_t>(i)] += double(g[i]) * g[i];
  }
  Image out = like<float>(img);
  for (Index i = 0; i < img.size(); ++i) out[i] = static_cast<float>(std::sqrt(sum_sq[static_cast<std::size_t>(i)]));
  return out;
}

Image normalize_minmax(const Image& img) {
  Image out = like<float>(img);
  if (img.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(img.begin(), img.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return out;
  for (Index i = 0; i < img.size(); ++i) out[i] = static_cast<float>((img[i] - lo) / (hi - lo));
  return out;
}

}  // namespace nucleitrace
