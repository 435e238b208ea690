#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "nucleitrace/image.hpp"

namespace nucleitrace {

/// 8-bit RGB raster, row-major, three bytes per pixel.
struct RgbImage {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t* pixel(Index x, Index y) { return &rgb[std::size_t(3 * (x + width * y))]; }
  const std::uint8_t* pixel(Index x, Index y) const { return &rgb[std::size_t(3 * (x + width * y))]; }
  bool operator==(const RgbImage&) const = default;
};

/// Color of a track id; a pure function of the id.
std::array<std::uint8_t, 3> label_color(Label id);

/// Grayscale raw frame (min-max scaled) with each labeled region tinted by
/// its color, its outline drawn opaque and its id written at its centroid.
/// 3D input is max-projected along z first. Unlabeled pixels stay gray.
RgbImage render_overlay(const Image& raw, const LabelImage& labels);

void write_png(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_png(const std::filesystem::path& path);

}  // namespace nucleitrace
