#include "nucleitrace/tiff_io.hpp"

#include <tiffio.h>

#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <regex>

namespace nucleitrace {

namespace {

thread_local std::string tiff_error;

void on_tiff_error(const char* module, const char* fmt, va_list ap) {
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  tiff_error = module ? std::string(module) + ": " + buf : std::string(buf);
}

// Unknown private tags are common in microscopy files and harmless here.
void on_tiff_warning(const char*, const char*, va_list) {}

struct TiffCloser {
  void operator()(TIFF* t) const { TIFFClose(t); }
};
using TiffHandle = std::unique_ptr<TIFF, TiffCloser>;

TiffHandle open_tiff(const fs::path& path, const char* mode) {
  TIFFSetErrorHandler(on_tiff_error);
  TIFFSetWarningHandler(on_tiff_warning);
  tiff_error.clear();
  TIFF* t = TIFFOpen(path.c_str(), mode);
  if (!t) throw DataError("cannot open " + path.string() + (tiff_error.empty() ? "" : ": " + tiff_error));
  return TiffHandle(t);
}

struct Page {
  std::uint32_t width = 0, height = 0;
  std::vector<std::uint16_t> values;
};

template <typename T>
void unpack_row(const std::vector<unsigned char>& row, std::uint32_t width, std::uint16_t* out) {
  const T* v = reinterpret_cast<const T*>(row.data());
  for (std::uint32_t x = 0; x < width; ++x) out[x] = v[x];
}

Page read_page(TIFF* t, const fs::path& path) {
  Page p;
  std::uint16_t bits = 0, spp = 1, format = SAMPLEFORMAT_UINT;
  TIFFGetField(t, TIFFTAG_IMAGEWIDTH, &p.width);
  TIFFGetField(t, TIFFTAG_IMAGELENGTH, &p.height);
  TIFFGetField(t, TIFFTAG_BITSPERSAMPLE, &bits);
  TIFFGetFieldDefaulted(t, TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(t, TIFFTAG_SAMPLEFORMAT, &format);
  if (spp != 1) throw DataError(path.string() + ": only single-channel images are supported");
  if ((bits != 8 && bits != 16) || format != SAMPLEFORMAT_UINT) {
    throw DataError(path.string() + ": unsupported bit depth " + std::to_string(bits) +
                    " (8- or 16-bit unsigned expected)");
  }
  if (TIFFIsTiled(t)) throw DataError(path.string() + ": tiled TIFF is not supported");
  p.values.resize(std::size_t(p.width) * p.height);
  std::vector<unsigned char> row(static_cast<std::size_t>(TIFFScanlineSize(t)));
  for (std::uint32_t y = 0; y < p.height; ++y) {
    if (TIFFReadScanline(t, row.data(), y, 0) < 0) throw DataError(path.string() + ": " + tiff_error);
    std::uint16_t* out = p.values.data() + std::size_t(y) * p.width;
    if (bits == 8) {
      unpack_row<std::uint8_t>(row, p.width, out);
    } else {
      unpack_row<std::uint16_t>(row, p.width, out);
    }
  }
  return p;
}

template <typename T>
Raster<T> read_raster(const fs::path& path) {
  TiffHandle t = open_tiff(path, "r");
  std::vector<Page> pages;
  do {
    pages.push_back(read_page(t.get(), path));
    if (pages.back().width != pages.front().width || pages.back().height != pages.front().height) {
      throw DataError(path.string() + ": pages differ in size");
    }
  } while (TIFFReadDirectory(t.get()));
  const Index nx = pages.front().width, ny = pages.front().height;
  const Dims dims = pages.size() == 1 ? Dims(nx, ny) : Dims(nx, ny, Index(pages.size()));
  Raster<T> out(dims);
  Index i = 0;
  for (const Page& p : pages) {
    for (std::uint16_t v : p.values) out[i++] = static_cast<T>(v);
  }
  return out;
}

template <typename T, typename Convert>
void write_raster16(const fs::path& path, const Raster<T>& img, Convert to_u16) {
  if (img.empty()) throw ParameterError("cannot write an empty image to " + path.string());
  const Dims& d = img.dims();
  std::vector<std::uint16_t> row(static_cast<std::size_t>(d[0]));
  TiffHandle t = open_tiff(path, "w");
  for (Index z = 0; z < d[2]; ++z) {
    TIFFSetField(t.get(), TIFFTAG_IMAGEWIDTH, std::uint32_t(d[0]));
    TIFFSetField(t.get(), TIFFTAG_IMAGELENGTH, std::uint32_t(d[1]));
    TIFFSetField(t.get(), TIFFTAG_BITSPERSAMPLE, 16);
    TIFFSetField(t.get(), TIFFTAG_SAMPLESPERPIXEL, 1);
    TIFFSetField(t.get(), TIFFTAG_SAMPLEFORMAT, SAMPLEFORMAT_UINT);
    TIFFSetField(t.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
    TIFFSetField(t.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(t.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
    TIFFSetField(t.get(), TIFFTAG_ROWSPERSTRIP, std::uint32_t(d[1]));
    if (d[2] > 1) {
      TIFFSetField(t.get(), TIFFTAG_SUBFILETYPE, FILETYPE_PAGE);
      TIFFSetField(t.get(), TIFFTAG_PAGENUMBER, std::uint16_t(z), std::uint16_t(d[2]));
    }
    for (Index y = 0; y < d[1]; ++y) {
      for (Index x = 0; x < d[0]; ++x) row[std::size_t(x)] = to_u16(img.at(x, y, z));
      if (TIFFWriteScanline(t.get(), row.data(), std::uint32_t(y), 0) < 0) {
        throw DataError("cannot write " + path.string() + ": " + tiff_error);
      }
    }
    if (!TIFFWriteDirectory(t.get())) throw DataError("cannot write " + path.string() + ": " + tiff_error);
  }
}

std::map<int, fs::path> list_frames(const fs::path& dir, const std::string& prefix) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  const std::regex pattern(prefix + R"((\d+)\.tiff?)");
  std::map<int, fs::path> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    const int index = std::stoi(m[1]);
    if (!found.emplace(index, entry.path()).second) throw DataError(dir.string() + ": duplicate frame " + name);
  }
  if (found.empty()) throw DataError(dir.string() + ": no frames named " + prefix + "NNN.tif");
  int expected = 0;
  for (const auto& [index, path] : found) {
    if (index != expected) {
      throw DataError(dir.string() + ": frames " + std::to_string(expected) + ".." + std::to_string(index - 1) +
                      " are missing");
    }
    ++expected;
  }
  return found;
}

template <typename T, typename Read>
std::vector<Raster<T>> read_all(const fs::path& dir, const std::string& prefix, Read read) {
  std::vector<Raster<T>> out;
  for (const auto& [index, path] : list_frames(dir, prefix)) {
    out.push_back(read(path));
    if (out.back().dims() != out.front().dims()) {
      throw DataError(path.string() + ": size " + out.back().dims().str() + " differs from frame 0 (" +
                      out.front().dims().str() + ")");
    }
  }
  return out;
}

}  // namespace

Image read_tiff(const fs::path& path) { return read_raster<float>(path); }

LabelImage read_label_tiff(const fs::path& path) { return read_raster<Label>(path); }

// Range checks run before the file is opened so a failure leaves no file.
void write_tiff16(const fs::path& path, const Image& img) {
  for (float v : img) {
    const double r = std::nearbyint(v);
    if (!(r >= 0.0 && r <= 65535.0)) {
      throw ParameterError(path.string() + ": intensity " + std::to_string(v) + " outside the 16-bit range");
    }
  }
  write_raster16(path, img, [](float v) { return static_cast<std::uint16_t>(std::nearbyint(v)); });
}

void write_label_tiff(const fs::path& path, const LabelImage& labels) {
  for (Label v : labels) {
    if (v > 65535u) throw DataError(path.string() + ": label " + std::to_string(v) + " does not fit in 16 bits");
  }
  write_raster16(path, labels, [](Label v) { return static_cast<std::uint16_t>(v); });
}

std::string frame_file_name(const std::string& prefix, int frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03d", frame);
  return prefix + buf + ".tif";
}

std::vector<Image> read_sequence(const fs::path& dir, const std::string& prefix) {
  return read_all<float>(dir, prefix, read_tiff);
}

std::vector<LabelImage> read_masks(const fs::path& dir) { return read_all<Label>(dir, "mask", read_label_tiff); }

void write_sequence(const fs::path& dir, std::span<const Image> frames, const std::string& prefix) {
  fs::create_directories(dir);
  for (std::size_t t = 0; t < frames.size(); ++t) write_tiff16(dir / frame_file_name(prefix, int(t)), frames[t]);
}

void write_masks(const fs::path& dir, std::span<const LabelImage> masks) {
  fs::create_directories(dir);
  for (std::size_t t = 0; t < masks.size(); ++t) write_label_tiff(dir / frame_file_name("mask", int(t)), masks[t]);
}

}  // namespace nucleitrace
