#include "nucleitrace/flow.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "nucleitrace/filters.hpp"
#include "nucleitrace/resize.hpp"

namespace nucleitrace {

void FlowParams::validate() const {
  if (levels < 1) throw ParameterError("flow: levels must be >= 1");
  if (!(pyr_scale > 0.0 && pyr_scale < 1.0)) throw ParameterError("flow: pyr_scale must lie in (0, 1)");
  if (iterations < 1) throw ParameterError("flow: iterations must be >= 1");
  if (winsize < 3 || winsize % 2 == 0) throw ParameterError("flow: winsize must be odd and >= 3");
  if (poly_n < 1) throw ParameterError("flow: poly_n must be >= 1");
  if (!(poly_sigma > 0.0)) throw ParameterError("flow: poly_sigma must be > 0");
}

namespace {

using Mat6 = std::array<std::array<double, 6>, 6>;

Mat6 invert(Mat6 m) {
  Mat6 inv{};
  for (std::size_t i = 0; i < 6; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < 6; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < 6; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[pivot][c])) pivot = r;
    }
    std::swap(m[c], m[pivot]);
    std::swap(inv[c], inv[pivot]);
    const double p = m[c][c];
    if (p == 0.0) throw ParameterError("flow: singular polynomial basis");
    for (std::size_t k = 0; k < 6; ++k) {
      m[c][k] /= p;
      inv[c][k] /= p;
    }
    for (std::size_t r = 0; r < 6; ++r) {
      if (r == c) continue;
      const double f = m[r][c];
      for (std::size_t k = 0; k < 6; ++k) {
        m[r][k] -= f * m[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

double bilinear(const Image& f, double x, double y) {
  const Dims& d = f.dims();
  x = std::clamp(x, 0.0, double(d[0] - 1));
  y = std::clamp(y, 0.0, double(d[1] - 1));
  const Index x0 = static_cast<Index>(x), y0 = static_cast<Index>(y);
  const Index x1 = std::min(x0 + 1, d[0] - 1), y1 = std::min(y0 + 1, d[1] - 1);
  const double fx = x - double(x0), fy = y - double(y0);
  return (1 - fy) * ((1 - fx) * f.at(x0, y0) + fx * f.at(x1, y0)) +
         fy * ((1 - fx) * f.at(x0, y1) + fx * f.at(x1, y1));
}

// One level: refines `flow` in place.
void refine(const PolyExpansion& e1, const PolyExpansion& e2, FlowField& flow, const FlowParams& params) {
  const Dims& dims = e1.b1.dims();
  const double window_sigma = 0.3 * (params.winsize / 2);
  for (int it = 0; it < params.iterations; ++it) {
    Image g11(dims), g12(dims), g22(dims), h1(dims), h2(dims);
    for (Index y = 0; y < dims[1]; ++y) {
      for (Index x = 0; x < dims[0]; ++x) {
        const double d1 = flow.dx.at(x, y), d2 = flow.dy.at(x, y);
        const double sx = double(x) + d1, sy = double(y) + d2;
        const double a11 = 0.5 * (e1.a11.at(x, y) + bilinear(e2.a11, sx, sy));
        const double a12 = 0.5 * (e1.a12.at(x, y) + bilinear(e2.a12, sx, sy));
        const double a22 = 0.5 * (e1.a22.at(x, y) + bilinear(e2.a22, sx, sy));
        const double db1 = -0.5 * (bilinear(e2.b1, sx, sy) - e1.b1.at(x, y)) + a11 * d1 + a12 * d2;
        const double db2 = -0.5 * (bilinear(e2.b2, sx, sy) - e1.b2.at(x, y)) + a12 * d1 + a22 * d2;
        g11.at(x, y) = static_cast<float>(a11 * a11 + a12 * a12);
        g12.at(x, y) = static_cast<float>(a11 * a12 + a12 * a22);
        g22.at(x, y) = static_cast<float>(a12 * a12 + a22 * a22);
        h1.at(x, y) = static_cast<float>(a11 * db1 + a12 * db2);
        h2.at(x, y) = static_cast<float>(a12 * db1 + a22 * db2);
      }
    }
    g11 = gaussian_filter(g11, window_sigma);
    g12 = gaussian_filter(g12, window_sigma);
    g22 = gaussian_filter(g22, window_sigma);
    h1 = gaussian_filter(h1, window_sigma);
    h2 = gaussian_filter(h2, window_sigma);
    for (Index i = 0; i < g11.size(); ++i) {
      const double det = double(g11[i]) * g22[i] - double(g12[i]) * g12[i] + 1e-3;
      flow.dx[i] = static_cast<float>((double(g22[i]) * h1[i] - double(g12[i]) * h2[i]) / det);
      flow.dy[i] = static_cast<float>((double(g11[i]) * h2[i] - double(g12[i]) * h1[i]) / det);
    }
  }
}

Image level_image(const Image& img, double scale, const Dims& dims) {
  if (scale == 1.0) return img;
  return resize(gaussian_filter(img, (1.0 / scale - 1.0) * 0.5), dims);
}

}  // namespace

PolyExpansion poly_expand(const Image& img, int poly_n, double poly_sigma) {
  if (img.ndim() != 2) throw ParameterError("poly_expand: 2D images only");
  const int n = poly_n;
  std::vector<double> g(static_cast<std::size_t>(2 * n + 1)), xg(g.size()), xxg(g.size());
  for (int i = -n; i <= n; ++i) {
    const auto k = static_cast<std::size_t>(i + n);
    g[k] = std::exp(-0.5 * i * i / (poly_sigma * poly_sigma));
    xg[k] = i * g[k];
    xxg[k] = i * i * g[k];
  }

  // Gram matrix of the basis {1, x, y, x^2, y^2, xy} under the applicability.
  Mat6 gram{};
  for (int y = -n; y <= n; ++y) {
    for (int x = -n; x <= n; ++x) {
      const double w = g[static_cast<std::size_t>(x + n)] * g[static_cast<std::size_t>(y + n)];
      const double b[6] = {1.0, double(x), double(y), double(x * x), double(y * y), double(x * y)};
      for (std::size_t p = 0; p < 6; ++p)
        for (std::size_t q = 0; q < 6; ++q) gram[p][q] += w * b[p] * b[q];
    }
  }
  const Mat6 inv = invert(gram);

  const Image r0 = convolve_axis(img, 0, g), r1 = convolve_axis(img, 0, xg), r2 = convolve_axis(img, 0, xxg);
  const Image m[6] = {convolve_axis(r0, 1, g),   convolve_axis(r1, 1, g),   convolve_axis(r0, 1, xg),
                      convolve_axis(r2, 1, g),   convolve_axis(r0, 1, xxg), convolve_axis(r1, 1, xg)};

  PolyExpansion e{like<float>(img), like<float>(img), like<float>(img), like<float>(img), like<float>(img)};
  for (Index i = 0; i < img.size(); ++i) {
    double r[6] = {};
    for (std::size_t p = 0; p < 6; ++p)
      for (std::size_t q = 0; q < 6; ++q) r[p] += inv[p][q] * m[q][i];
    e.b1[i] = static_cast<float>(r[1]);
    e.b2[i] = static_cast<float>(r[2]);
    e.a11[i] = static_cast<float>(r[3]);
    e.a22[i] = static_cast<float>(r[4]);
    e.a12[i] = static_cast<float>(0.5 * r[5]);
  }
  return e;
}

FlowField farneback_flow(const Image& prev, const Image& next, const FlowParams& params) {
  params.validate();
  if (prev.ndim() != 2) throw ParameterError("farneback_flow: 2D images only");
  if (prev.dims() != next.dims()) {
    throw ParameterError("farneback_flow: frame sizes differ (" + prev.dims().str() + " vs " + next.dims().str() + ")");
  }
  FlowField flow;
  for (int level = params.levels - 1; level >= 0; --level) {
    const double scale = std::pow(params.pyr_scale, level);
    const Dims dims(std::max<Index>(1, std::lround(double(prev.dims()[0]) * scale)),
                    std::max<Index>(1, std::lround(double(prev.dims()[1]) * scale)));
    if (flow.dx.empty()) {
      flow = FlowField(dims);
    } else {
      const double fx = double(dims[0]) / double(flow.dims()[0]);
      const double fy = double(dims[1]) / double(flow.dims()[1]);
      FlowField up{};
      up.dx = resize(flow.dx, dims);
      up.dy = resize(flow.dy, dims);
      for (float& v : up.dx) v = static_cast<float>(v * fx);
      for (float& v : up.dy) v = static_cast<float>(v * fy);
      flow = std::move(up);
    }
    const PolyExpansion e1 = poly_expand(level_image(prev, scale, dims), params.poly_n, params.poly_sigma);
    const PolyExpansion e2 = poly_expand(level_image(next, scale, dims), params.poly_n, params.poly_sigma);
    refine(e1, e2, flow, params);
  }
  return flow;
}

}  // namespace nucleitrace
