#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nucleitrace/image.hpp"

namespace nucleitrace {

namespace fs = std::filesystem;

/// Reads an 8- or 16-bit unsigned grayscale TIFF. Several pages form a 3D
/// stack with page k at z = k; a single page is a 2D image.
Image read_tiff(const fs::path& path);

/// Writes `img` as an uncompressed 16-bit grayscale TIFF, one page per z
/// slice. Values are rounded and must lie in [0, 65535].
void write_tiff16(const fs::path& path, const Image& img);

LabelImage read_label_tiff(const fs::path& path);
/// Labels must fit in 16 bits.
void write_label_tiff(const fs::path& path, const LabelImage& labels);

/// `prefix` followed by the zero-padded frame index, e.g. "t007.tif".
std::string frame_file_name(const std::string& prefix, int frame);

/// Frames `<prefix>NNN.tif` of `dir`, in index order. Fails on an empty
/// directory, a gap in the indices or frames of differing size.
std::vector<Image> read_sequence(const fs::path& dir, const std::string& prefix = "t");
std::vector<LabelImage> read_masks(const fs::path& dir);

/// One `maskNNN.tif` per frame.
void write_sequence(const fs::path& dir, std::span<const Image> frames, const std::string& prefix = "t");
void write_masks(const fs::path& dir, std::span<const LabelImage> masks);

}  // namespace nucleitrace
