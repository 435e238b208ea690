#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nucleitrace/errors.hpp"

namespace nucleitrace {

using Index = std::ptrdiff_t;
using Label = std::uint32_t;

/// Continuous voxel coordinates (x, y, z). The z component is 0 for 2D data.
using Point = std::array<double, 3>;

/// Physical voxel size per axis.
using Spacing = std::array<double, 3>;

/// Extents of a 2D or 3D raster, x fastest-varying in memory.
class Dims {
 public:
  Dims() = default;
  Dims(Index nx, Index ny) : ext_{nx, ny, 1}, ndim_(2) { validate(); }
  Dims(Index nx, Index ny, Index nz) : ext_{nx, ny, nz}, ndim_(3) { validate(); }

  static Dims of(std::span<const Index> extents) {
    if (extents.size() == 2) return {extents[0], extents[1]};
    if (extents.size() == 3) return {extents[0], extents[1], extents[2]};
    throw ParameterError("image must have 2 or 3 axes, got " + std::to_string(extents.size()));
  }

  int ndim() const { return ndim_; }
  Index operator[](int axis) const { return ext_[static_cast<std::size_t>(axis)]; }
  Index size() const { return ndim_ == 0 ? 0 : ext_[0] * ext_[1] * ext_[2]; }
  bool empty() const { return ndim_ == 0; }

  Index stride(int axis) const {
    return axis == 0 ? 1 : axis == 1 ? ext_[0] : ext_[0] * ext_[1];
  }

  Index index(Index x, Index y, Index z = 0) const { return x + ext_[0] * (y + ext_[1] * z); }

  std::array<Index, 3> coords(Index i) const {
    const Index x = i % ext_[0];
    const Index rest = i / ext_[0];
    return {x, rest % ext_[1], rest / ext_[1]};
  }

  bool contains(Index x, Index y, Index z = 0) const {
    return x >= 0 && y >= 0 && z >= 0 && x < ext_[0] && y < ext_[1] && z < ext_[2];
  }

  bool operator==(const Dims&) const = default;

  std::string str() const {
    std::string s = std::to_string(ext_[0]) + "x" + std::to_string(ext_[1]);
    if (ndim_ == 3) s += "x" + std::to_string(ext_[2]);
    return s;
  }

 private:
  void validate() const {
    for (Index e : ext_) {
      if (e < 1) throw ParameterError("image extents must be >= 1");
    }
  }

  std::array<Index, 3> ext_{1, 1, 1};
  int ndim_ = 0;
};

/// Dense scalar raster with per-axis spacing.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  explicit Raster(Dims dims, T fill = T{}, Spacing spacing = {1.0, 1.0, 1.0})
      : dims_(dims), spacing_(spacing), data_(static_cast<std::size_t>(dims.size()), fill) {
    for (double s : spacing_) {
      if (!(s > 0.0)) throw ParameterError("voxel spacing must be > 0");
    }
  }

  const Dims& dims() const { return dims_; }
  int ndim() const { return dims_.ndim(); }
  Index size() const { return static_cast<Index>(data_.size()); }
  bool empty() const { return data_.empty(); }

  const Spacing& spacing() const { return spacing_; }
  void set_spacing(const Spacing& s) {
    for (double v : s) {
      if (!(v > 0.0)) throw ParameterError("voxel spacing must be > 0");
    }
    spacing_ = s;
  }

  T& operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](Index i) const { return data_[static_cast<std::size_t>(i)]; }

  T& at(Index x, Index y, Index z = 0) { return data_[static_cast<std::size_t>(dims_.index(x, y, z))]; }
  const T& at(Index x, Index y, Index z = 0) const {
    return data_[static_cast<std::size_t>(dims_.index(x, y, z))];
  }

  // Clamp-to-edge access.
  const T& clamped(Index x, Index y, Index z = 0) const {
    x = std::clamp<Index>(x, 0, dims_[0] - 1);
    y = std::clamp<Index>(y, 0, dims_[1] - 1);
    z = std::clamp<Index>(z, 0, dims_[2] - 1);
    return at(x, y, z);
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool operator==(const Raster&) const = default;

 private:
  Dims dims_;
  Spacing spacing_{1.0, 1.0, 1.0};
  std::vector<T> data_;
};

using Image = Raster<float>;
using LabelImage = Raster<Label>;
using Mask = Raster<std::uint8_t>;

/// A raster of a different value type with the same geometry.
template <typename U, typename T>
Raster<U> like(const Raster<T>& ref, U fill = U{}) {
  return Raster<U>(ref.dims(), fill, ref.spacing());
}

/// Isotropic integer radius of a structuring element.
class StructuringRadius {
 public:
  explicit StructuringRadius(int r) : r_(r) {
    if (r < 0) throw ParameterError("structuring radius must be >= 0");
  }
  int value() const { return r_; }

 private:
  int r_;
};

enum class Connectivity {
  kFace,  // 4 in 2D, 6 in 3D
  kFull,  // 8 in 2D, 26 in 3D
};

struct Offset {
  Index dx, dy, dz;
};

/// Neighbor offsets (excluding the origin) for the given connectivity.
std::vector<Offset> neighbor_offsets(int ndim, Connectivity conn);

/// Offsets of a discrete Euclidean ball: all integer vectors with |v| <= r.
std::vector<Offset> ball_offsets(int ndim, int r);

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Point& a, const Point& b) { return std::sqrt(squared_distance(a, b)); }

/// Nearest voxel to a continuous coordinate, clamped into the raster.
inline std::array<Index, 3> nearest_voxel(const Dims& dims, const Point& p) {
  std::array<Index, 3> v{};
  for (int a = 0; a < 3; ++a) {
    v[static_cast<std::size_t>(a)] =
        std::clamp<Index>(static_cast<Index>(std::lround(p[static_cast<std::size_t>(a)])), 0, dims[a] - 1);
  }
  return v;
}

}  // namespace nucleitrace
