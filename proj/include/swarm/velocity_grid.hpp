#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace swarm {

// Uniform cell-centred grid on [-v_max, v_max]^dim.
struct VelocityGrid {
  double v_max = 4.0;
  int n = 64;
  int dim = 2;

  double spacing() const { return 2.0 * v_max / n; }
  double cell_volume() const { return std::pow(spacing(), dim); }
  double center(int i) const { return -v_max + (i + 0.5) * spacing(); }
  std::size_t size() const {
    std::size_t s = 1;
    for (int k = 0; k < dim; ++k) s *= static_cast<std::size_t>(n);
    return s;
  }
  // Velocity of the flat index (component 0 varies fastest).
  std::array<double, 3> velocity(std::size_t idx) const {
    std::array<double, 3> v{0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) {
      v[k] = center(static_cast<int>(idx % n));
      idx /= n;
    }
    return v;
  }
  std::size_t stride(int k) const {
    std::size_t s = 1;
    for (int j = 0; j < k; ++j) s *= static_cast<std::size_t>(n);
    return s;
  }
  void validate(int max_dim = 3) const {
    if (dim < 1 || dim > max_dim) throw std::invalid_argument("velocity grid dimension must be 1.." + std::to_string(max_dim));
    if (n < 2) throw std::invalid_argument("velocity grid needs at least 2 points per axis");
    if (!(v_max > 0.0)) throw std::invalid_argument("velocity grid half-width must be positive");
  }
};

}  // namespace swarm
