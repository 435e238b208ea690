#include "nucleitrace/overlay.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <map>
#include <memory>
#include <string>

namespace nucleitrace {

std::array<std::uint8_t, 3> label_color(Label id) {
  // splitmix64 finalizer, then a floor so colors stay visible on dark pixels.
  std::uint64_t z = std::uint64_t(id) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return {std::uint8_t(64 + (z & 0xFF) % 192), std::uint8_t(64 + ((z >> 8) & 0xFF) % 192),
          std::uint8_t(64 + ((z >> 16) & 0xFF) % 192)};
}

namespace {

// 3x5 digit glyphs, one row per 3 bits, top row first.
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigits{{
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
}};

void put(RgbImage& img, Index x, Index y, std::array<std::uint8_t, 3> c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::uint8_t* p = img.pixel(x, y);
  p[0] = c[0];
  p[1] = c[1];
  p[2] = c[2];
}

void draw_number(RgbImage& img, Index cx, Index cy, Label id) {
  const std::string s = std::to_string(id);
  const Index w = Index(s.size()) * 4 - 1;
  Index x0 = cx - w / 2;
  const Index y0 = cy - 2;
  for (char ch : s) {
    const auto& g = kDigits[std::size_t(ch - '0')];
    for (Index r = 0; r < 5; ++r) {
      for (Index c = 0; c < 3; ++c) {
        if (g[std::size_t(r)] & (4 >> c)) put(img, x0 + c, y0 + r, {255, 255, 255});
      }
    }
    x0 += 4;
  }
}

}  // namespace

RgbImage render_overlay(const Image& raw, const LabelImage& labels) {
  if (raw.dims() != labels.dims()) {
    throw DataError("overlay: raw " + raw.dims().str() + " and mask " + labels.dims().str() + " differ in size");
  }
  const Dims& d = raw.dims();
  std::vector<float> gray(std::size_t(d[0] * d[1]), 0.0f);
  std::vector<Label> lab(gray.size(), 0);
  for (Index y = 0; y < d[1]; ++y) {
    for (Index x = 0; x < d[0]; ++x) {
      float g = raw.at(x, y, 0);
      Label l = 0;
      for (Index z = 0; z < d[2]; ++z) {
        g = std::max(g, raw.at(x, y, z));
        l = std::max(l, labels.at(x, y, z));
      }
      gray[std::size_t(x + d[0] * y)] = g;
      lab[std::size_t(x + d[0] * y)] = l;
    }
  }
  const auto [lo, hi] = std::minmax_element(gray.begin(), gray.end());
  const float lo_v = *lo, span = *hi - *lo;

  RgbImage img{d[0], d[1], std::vector<std::uint8_t>(std::size_t(3 * d[0] * d[1]))};
  std::map<Label, std::array<double, 3>> sums;
  for (Index y = 0; y < d[1]; ++y) {
    for (Index x = 0; x < d[0]; ++x) {
      const std::size_t i = std::size_t(x + d[0] * y);
      const auto v = std::uint8_t(span > 0 ? std::lround(255.0 * (gray[i] - lo_v) / span) : 0);
      std::uint8_t* p = img.pixel(x, y);
      p[0] = p[1] = p[2] = v;
      const Label l = lab[i];
      if (l == 0) continue;
      auto& s = sums[l];
      s[0] += double(x);
      s[1] += double(y);
      s[2] += 1.0;
      const auto c = label_color(l);
      bool edge = false;
      for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const Index nx = x + dx, ny = y + dy;
        edge |= nx < 0 || ny < 0 || nx >= d[0] || ny >= d[1] || lab[std::size_t(nx + d[0] * ny)] != l;
      }
      for (int k = 0; k < 3; ++k) p[k] = edge ? c[std::size_t(k)] : std::uint8_t((v + c[std::size_t(k)]) / 2);
    }
  }
  for (const auto& [l, s] : sums) {
    draw_number(img, Index(std::lround(s[0] / s[2])), Index(std::lround(s[1] / s[2])), l);
  }
  return img;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  *static_cast<std::string*>(png_get_error_ptr(png)) = msg;
  png_longjmp(png, 1);
}

}  // namespace

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw DataError("cannot write " + path.string());
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("cannot write " + path.string() + ": " + error);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index y = 0; y < img.height; ++y) png_write_row(png, img.rgb.data() + std::size_t(3 * img.width * y));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

RgbImage read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DataError("cannot read " + path.string());
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng initialization failed");
  }
  RgbImage img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("cannot read " + path.string() + ": " + error);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": expected an 8-bit RGB PNG");
  }
  img.width = Index(png_get_image_width(png, info));
  img.height = Index(png_get_image_height(png, info));
  img.rgb.resize(std::size_t(3 * img.width * img.height));
  for (Index y = 0; y < img.height; ++y) png_read_row(png, img.rgb.data() + std::size_t(3 * img.width * y), nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace nucleitrace
