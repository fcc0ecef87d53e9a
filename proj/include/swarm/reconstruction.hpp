#pragma once

#include <algorithm>
#include <cmath>

namespace swarm {

enum class Reconstruction { first_order, muscl_minmod, muscl_mc, muscl_unlimited };
enum class TimeIntegrator { forward_euler, ssp_rk2 };

// Slope of a cell from its left and right differences.
inline double limited_slope(Reconstruction r, double dl, double dr) {
  switch (r) {
    case Reconstruction::first_order:
      return 0.0;
    case Reconstruction::muscl_minmod:
      if (dl * dr <= 0.0) return 0.0;
      return std::abs(dl) < std::abs(dr) ? dl : dr;
    case Reconstruction::muscl_mc: {
      if (dl * dr <= 0.0) return 0.0;
      const double s = dl > 0.0 ? 1.0 : -1.0;
      return s * std::min({2.0 * std::abs(dl), 2.0 * std::abs(dr), 0.5 * std::abs(dl + dr)});
    }
    case Reconstruction::muscl_unlimited:
      return 0.5 * (dl + dr);
  }
  return 0.0;
}

}  // namespace swarm
