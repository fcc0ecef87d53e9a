#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace swarm {

// Periodic cell-centred grid on [0, lx) (x [0, ly) when dx == 2).
struct SpatialGrid {
  int dx = 1;
  int nx = 256;
  int ny = 1;
  double lx = 1.0;
  double ly = 1.0;

  int cells_along(int axis) const { return axis == 0 ? nx : ny; }
  double spacing(int axis) const { return axis == 0 ? lx / nx : ly / ny; }
  double min_spacing() const { return dx == 2 ? std::min(spacing(0), spacing(1)) : spacing(0); }
  double length(int axis) const { return axis == 0 ? lx : ly; }
  std::size_t cells() const { return static_cast<std::size_t>(nx) * (dx == 2 ? ny : 1); }
  double cell_volume() const { return dx == 2 ? spacing(0) * spacing(1) : spacing(0); }
  double x(std::size_t idx) const { return (static_cast<double>(idx % nx) + 0.5) * spacing(0); }
  double y(std::size_t idx) const { return dx == 2 ? (static_cast<double>(idx / nx) + 0.5) * spacing(1) : 0.0; }
  // Periodic neighbour of idx along axis, offset +-1.
  std::size_t neighbor(std::size_t idx, int axis, int offset) const {
    const std::size_t i = idx % nx, j = idx / nx;
    if (axis == 0) return j * nx + (i + nx + offset) % nx;
    return ((j + ny + offset) % ny) * nx + i;
  }
  void validate() const {
    if (dx != 1 && dx != 2) throw std::invalid_argument("spatial dimension must be 1 or 2");
    if (nx < 3 || (dx == 2 && ny < 3)) throw std::invalid_argument("spatial grid needs at least 3 cells per axis");
    if (!(lx > 0.0) || (dx == 2 && !(ly > 0.0))) throw std::invalid_argument("box length must be positive");
  }
};

}  // namespace swarm
