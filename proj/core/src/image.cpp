#include "nucleitrace/image.hpp"

namespace nucleitrace {

std::vector<Offset> neighbor_offsets(int ndim, Connectivity conn) {
  if (ndim != 2 && ndim != 3) throw ParameterError("neighbor_offsets: ndim must be 2 or 3");
  const Index zr = ndim == 3 ? 1 : 0;
  std::vector<Offset> out;
  for (Index dz = -zr; dz <= zr; ++dz) {
    for (Index dy = -1; dy <= 1; ++dy) {
      for (Index dx = -1; dx <= 1; ++dx) {
        const Index nonzero = (dx != 0) + (dy != 0) + (dz != 0);
        if (nonzero == 0) continue;
        if (conn == Connectivity::kFace && nonzero != 1) continue;
        out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

std::vector<Offset> ball_offsets(int ndim, int r) {
  if (ndim != 2 && ndim != 3) throw ParameterError("ball_offsets: ndim must be 2 or 3");
  if (r < 0) throw ParameterError("ball_offsets: radius must be >= 0");
  const Index zr = ndim == 3 ? r : 0;
  const Index r2 = static_cast<Index>(r) * r;
  std::vector<Offset> out;
  for (Index dz = -zr; dz <= zr; ++dz) {
    for (Index dy = -r; dy <= r; ++dy) {
      for (Index dx = -r; dx <= r; ++dx) {
        if (dx * dx + dy * dy + dz * dz <= r2) out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

}  // namespace nucleitrace
