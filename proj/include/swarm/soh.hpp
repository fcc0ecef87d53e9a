#pragma once

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/coeffs.hpp"
#include "swarm/errors.hpp"
#include "swarm/parallel.hpp"
#include "swarm/reconstruction.hpp"
#include "swarm/spatial_grid.hpp"

namespace swarm {

struct SOHSpeeds {
  double c1 = 1.0;
  double c2 = 1.0;
  double delta = 0.0;
};

// (c, c, T/c) at alpha = 0, (c1, c2, delta) of the alpha-model otherwise.
inline SOHSpeeds soh_speeds(const DerivedCoefficients& c) {
  if (c.alpha == 0.0) {
    if (!c.comfort_speed || !(*c.comfort_speed > 0.0))
      throw RegimeError("SOH speeds need T < T_c (temperature regime violated)");
    return {*c.comfort_speed, *c.comfort_speed, c.temp / *c.comfort_speed};
  }
  if (!c.c1_alpha || !(*c.c1_alpha > 0.0)) throw RegimeError("SOH speeds need T < T_c(alpha) (temperature regime violated)");
  return {*c.c1_alpha, *c.c2_alpha, *c.delta_alpha};
}

// Density and unit direction field; omega has two components per cell.
struct SOHState {
  SpatialGrid grid;
  std::vector<double> rho;
  std::vector<double> omega;
  double time = 0.0;
  SOHSpeeds speeds;

  SOHState() = default;
  SOHState(const SpatialGrid& g, const SOHSpeeds& s)
      : grid(g), rho(g.cells(), 1.0), omega(2 * g.cells(), 0.0), speeds(s) {}

  std::size_t cells() const { return rho.size(); }
  void set(std::size_t cell, double density, double angle) {
    rho[cell] = density;
    omega[2 * cell] = std::cos(angle);
    omega[2 * cell + 1] = std::sin(angle);
  }
  double angle(std::size_t cell) const { return std::atan2(omega[2 * cell + 1], omega[2 * cell]); }
  double mass() const {
    double s = 0.0;
    for (double r : rho) s += r;
    return s * grid.cell_volume();
  }
  double max_norm_defect() const {
    double m = 0.0;
    for (std::size_t i = 0; i < cells(); ++i) m = std::max(m, std::abs(std::hypot(omega[2 * i], omega[2 * i + 1]) - 1.0));
    return m;
  }
};

struct SOHOptions {
  Reconstruction recon = Reconstruction::muscl_mc;
  TimeIntegrator integrator = TimeIntegrator::ssp_rk2;
  bool renormalize = true;
  double cfl_max = 0.45;
  int threads = 1;
};

namespace detail {

// Bound on the characteristic speeds along an axis where omega . e = cos_n.
inline double soh_wave_bound(const SOHSpeeds& s, double cos_n) {
  const double sin2 = std::max(0.0, 1.0 - cos_n * cos_n);
  const double half = 0.5 * (s.c1 - s.c2) * cos_n;
  return std::abs(0.5 * (s.c1 + s.c2) * cos_n) + std::sqrt(half * half + std::abs(s.c1 * s.delta) * sin2);
}

inline void check_density(const SOHState& s) {
  double mean = 0.0;
  for (double r : s.rho) mean += r;
  mean /= static_cast<double>(s.cells());
  for (std::size_t i = 0; i < s.cells(); ++i)
    if (!(s.rho[i] > 1e-12 * mean)) throw VacuumError("density below floor in cell " + std::to_string(i));
}

// dA/dt written into rate_rho, rate_omega. The omega equation uses a
// path-conservative Rusanov splitting of the non-conservative terms.
inline void soh_rhs(const SOHState& s, const SOHOptions& opt, std::vector<double>& rate_rho,
                    std::vector<double>& rate_omega) {
  const auto& g = s.grid;
  const auto& sp = s.speeds;
  const std::size_t n = s.cells();
  check_density(s);
  std::fill(rate_rho.begin(), rate_rho.end(), 0.0);
  std::fill(rate_omega.begin(), rate_omega.end(), 0.0);

  auto project = [](double w0, double w1, double v0, double v1, double& o0, double& o1) {
    const double nn = std::hypot(w0, w1);
    const double e0 = w0 / nn, e1 = w1 / nn;
    const double dot = e0 * v0 + e1 * v1;
    o0 = v0 - dot * e0;
    o1 = v1 - dot * e1;
  };

  for (int axis = 0; axis < g.dx; ++axis) {
    const double h = g.spacing(axis);
    // reconstructed edge values per cell: [rho-, rho+, w0-, w0+, w1-, w1+]
    std::vector<double> edge(6 * n);
    parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const std::size_t l = g.neighbor(i, axis, -1), r = g.neighbor(i, axis, 1);
        const double sr = limited_slope(opt.recon, s.rho[i] - s.rho[l], s.rho[r] - s.rho[i]);
        edge[6 * i] = s.rho[i] - 0.5 * sr;
        edge[6 * i + 1] = s.rho[i] + 0.5 * sr;
        for (int c = 0; c < 2; ++c) {
          const double w = s.omega[2 * i + c];
          const double sw = limited_slope(opt.recon, w - s.omega[2 * l + c], s.omega[2 * r + c] - w);
          edge[6 * i + 2 + 2 * c] = w - 0.5 * sw;
          edge[6 * i + 3 + 2 * c] = w + 0.5 * sw;
        }
        if (!(edge[6 * i] > 0.0) || !(edge[6 * i + 1] > 0.0)) throw VacuumError("non-positive reconstructed density");
      }
    });
    // per face (i, i+1): mass flux and the two omega fluctuations
    std::vector<double> face(5 * n);
    parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const std::size_t j = g.neighbor(i, axis, 1);
        const double rl = edge[6 * i + 1], rr = edge[6 * j];
        const double wl[2] = {edge[6 * i + 3], edge[6 * i + 5]};
        const double wr[2] = {edge[6 * j + 2], edge[6 * j + 4]};
        const double a = std::max(soh_wave_bound(sp, wl[axis] / std::hypot(wl[0], wl[1])),
                                  soh_wave_bound(sp, wr[axis] / std::hypot(wr[0], wr[1])));
        face[5 * i] = 0.5 * sp.c1 * (rl * wl[axis] + rr * wr[axis]) - 0.5 * a * (rr - rl);
        const double wb[2] = {0.5 * (wl[0] + wr[0]), 0.5 * (wl[1] + wr[1])};
        const double dln = std::log(rr) - std::log(rl);
        const double dw[2] = {wr[0] - wl[0], wr[1] - wl[1]};
        double pg[2];
        project(wb[0], wb[1], axis == 0 ? dln : 0.0, axis == 1 ? dln : 0.0, pg[0], pg[1]);
        for (int c = 0; c < 2; ++c) {
          const double ad = sp.c2 * wb[axis] * dw[c] + sp.delta * pg[c];
          face[5 * i + 1 + c] = 0.5 * (ad - a * dw[c]);  // to cell i
          face[5 * i + 3 + c] = 0.5 * (ad + a * dw[c]);  // to cell i+1
        }
      }
    });
    parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const std::size_t l = g.neighbor(i, axis, -1);
        rate_rho[i] -= (face[5 * i] - face[5 * l]) / h;
        const double w[2] = {s.omega[2 * i], s.omega[2 * i + 1]};
        const double dln = std::log(edge[6 * i + 1]) - std::log(edge[6 * i]);
        double pg[2];
        project(w[0], w[1], axis == 0 ? dln : 0.0, axis == 1 ? dln : 0.0, pg[0], pg[1]);
        for (int c = 0; c < 2; ++c) {
          const double inner = sp.c2 * w[axis] * (edge[6 * i + 3 + 2 * c] - edge[6 * i + 2 + 2 * c]) + sp.delta * pg[c];
          rate_omega[2 * i + c] -= (face[5 * i + 1 + c] + face[5 * l + 3 + c] + inner) / h;
        }
      }
    });
  }
  // keep the update tangent to the sphere
  for (std::size_t i = 0; i < n; ++i) {
    double o0, o1;
    project(s.omega[2 * i], s.omega[2 * i + 1], rate_omega[2 * i], rate_omega[2 * i + 1], o0, o1);
    rate_omega[2 * i] = o0;
    rate_omega[2 * i + 1] = o1;
  }
}

inline double soh_max_speed(const SOHState& s) {
  const auto& sp = s.speeds;
  double a = std::max(std::abs(sp.c1), std::abs(sp.c2));
  double grad = 0.0;
  for (std::size_t i = 0; i < s.cells(); ++i) {
    const double nn = std::hypot(s.omega[2 * i], s.omega[2 * i + 1]);
    for (int axis = 0; axis < s.grid.dx; ++axis) {
      a = std::max(a, soh_wave_bound(sp, s.omega[2 * i + axis] / nn));
      const std::size_t r = s.grid.neighbor(i, axis, 1);
      grad = std::max(grad, std::abs(std::log(s.rho[r]) - std::log(s.rho[i])));
    }
  }
  return std::max(a, std::abs(sp.c2) + std::abs(sp.delta) * grad);
}

inline void renormalize(SOHState& s) {
  for (std::size_t i = 0; i < s.cells(); ++i) {
    const double nn = std::hypot(s.omega[2 * i], s.omega[2 * i + 1]);
    if (!(nn > 0.0)) throw std::domain_error("direction field vanished in cell " + std::to_string(i));
    s.omega[2 * i] /= nn;
    s.omega[2 * i + 1] /= nn;
  }
}

}  // namespace detail

inline SOHState soh_step(const SOHState& s, double dt, const SOHOptions& opt = {}) {
  s.grid.validate();
  if (s.rho.size() != s.grid.cells() || s.omega.size() != 2 * s.grid.cells())
    throw std::invalid_argument("SOH state arrays do not match the grid");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  detail::check_density(s);
  const double cfl = dt * detail::soh_max_speed(s) / s.grid.min_spacing();
  if (cfl > opt.cfl_max) throw StabilityError("SOH CFL number " + std::to_string(cfl) + " exceeds " + std::to_string(opt.cfl_max));
  std::vector<double> rr(s.rho.size()), rw(s.omega.size());
  auto stage = [&](const SOHState& in) {
    SOHState out = in;
    detail::soh_rhs(in, opt, rr, rw);
    for (std::size_t i = 0; i < out.rho.size(); ++i) out.rho[i] += dt * rr[i];
    for (std::size_t i = 0; i < out.omega.size(); ++i) out.omega[i] += dt * rw[i];
    return out;
  };
  SOHState v = stage(s);
  if (opt.integrator == TimeIntegrator::ssp_rk2) {
    const SOHState w = stage(v);
    for (std::size_t i = 0; i < v.rho.size(); ++i) v.rho[i] = 0.5 * (s.rho[i] + w.rho[i]);
    for (std::size_t i = 0; i < v.omega.size(); ++i) v.omega[i] = 0.5 * (s.omega[i] + w.omega[i]);
  }
  for (std::size_t i = 0; i < v.rho.size(); ++i)
    if (!(v.rho[i] > 0.0)) throw VacuumError("density became non-positive in cell " + std::to_string(i));
  if (opt.renormalize) detail::renormalize(v);
  v.time = s.time + dt;
  return v;
}

inline double soh_stable_dt(const SOHState& s, double cfl_target = 0.4) {
  return cfl_target * s.grid.min_spacing() / detail::soh_max_speed(s);
}

struct SOHRunOptions {
  SOHOptions step;
  double dt = 0.0;  // 0: from the CFL target every step
  double cfl_target = 0.4;
  double snapshot_every = 0.0;
  std::function<void(const SOHState&)> observer;
};

inline SOHState soh_integrate(SOHState s, double t_end, const SOHRunOptions& opt = {}) {
  double next_snap = opt.snapshot_every > 0.0 ? s.time + opt.snapshot_every : std::numeric_limits<double>::infinity();
  const double tol = 1e-12 * std::max(1.0, std::abs(t_end));
  if (opt.observer) opt.observer(s);
  bool end_seen = s.time >= t_end - tol;
  while (s.time < t_end - tol) {
    double dt = opt.dt > 0.0 ? opt.dt : soh_stable_dt(s, opt.cfl_target);
    dt = std::min({dt, t_end - s.time, next_snap - s.time});
    s = soh_step(s, dt, opt.step);
    if (std::abs(s.time - t_end) <= tol) s.time = t_end;
    if (s.time >= next_snap - tol) {
      s.time = std::min(next_snap, t_end);
      next_snap += opt.snapshot_every;
      if (opt.observer) opt.observer(s);
      end_seen = s.time >= t_end;
    }
  }
  if (opt.observer && !end_seen) opt.observer(s);
  return s;
}

// Max ||omega| - 1| after `steps` steps with renormalisation switched off.
inline double norm_drift_probe(SOHState s, int steps, double dt, SOHOptions opt = {}) {
  opt.renormalize = false;
  for (int k = 0; k < steps; ++k) s = soh_step(s, dt, opt);
  return s.max_norm_defect();
}

struct DiffusionState {
  SpatialGrid grid;
  std::vector<double> rho;
  double d_diff = 1.0;
  double time = 0.0;

  double mass() const {
    double s = 0.0;
    for (double r : rho) s += r;
    return s * grid.cell_volume();
  }
};

enum class DiffusionMode { explicit_euler, trapezoidal };

struct DiffusionResult {
  DiffusionState state;
  std::vector<double> velocity;  // -D grad ln rho, grid.dx components per cell
};

// -D grad ln rho by central differences; NaN where a stencil density is
// not positive.
inline std::vector<double> diffusion_velocity(const DiffusionState& s) {
  const auto& g = s.grid;
  std::vector<double> u(g.cells() * g.dx, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < g.cells(); ++i) {
    for (int k = 0; k < g.dx; ++k) {
      const std::size_t r = g.neighbor(i, k, 1), l = g.neighbor(i, k, -1);
      if (!(s.rho[r] > 0.0) || !(s.rho[l] > 0.0)) continue;
      u[i * g.dx + k] = -s.d_diff * (std::log(s.rho[r]) - std::log(s.rho[l])) / (2.0 * g.spacing(k));
    }
  }
  return u;
}

namespace detail {

// Crank-Nicolson step of the 5-point (3-point) periodic Laplacian, solved
// exactly in Fourier space.
inline void trapezoidal_heat(DiffusionState& s, double dt) {
  const auto& g = s.grid;
  const int nx = g.nx, ny = g.dx == 2 ? g.ny : 1;
  const int nxc = nx / 2 + 1;
  std::vector<double> in(s.rho);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(ny) * nxc);
  auto* out = reinterpret_cast<fftw_complex*>(spec.data());
  fftw_plan fwd = g.dx == 2 ? fftw_plan_dft_r2c_2d(ny, nx, in.data(), out, FFTW_ESTIMATE)
                            : fftw_plan_dft_r2c_1d(nx, in.data(), out, FFTW_ESTIMATE);
  fftw_plan bwd = g.dx == 2 ? fftw_plan_dft_c2r_2d(ny, nx, out, in.data(), FFTW_ESTIMATE)
                            : fftw_plan_dft_c2r_1d(nx, out, in.data(), FFTW_ESTIMATE);
  std::copy(s.rho.begin(), s.rho.end(), in.begin());
  fftw_execute(fwd);
  const double hx = g.spacing(0), hy = g.dx == 2 ? g.spacing(1) : 1.0;
  for (int j = 0; j < ny; ++j) {
    const double sy = g.dx == 2 ? std::sin(std::numbers::pi * j / ny) : 0.0;
    for (int i = 0; i < nxc; ++i) {
      const double sx = std::sin(std::numbers::pi * i / nx);
      const double lam = -4.0 * sx * sx / (hx * hx) - (g.dx == 2 ? 4.0 * sy * sy / (hy * hy) : 0.0);
      const double z = 0.5 * dt * s.d_diff * lam;
      spec[static_cast<std::size_t>(j) * nxc + i] *= (1.0 + z) / (1.0 - z);
    }
  }
  fftw_execute(bwd);
  const double norm = 1.0 / (static_cast<double>(nx) * ny);
  for (std::size_t i = 0; i < s.rho.size(); ++i) s.rho[i] = in[i] * norm;
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
}

}  // namespace detail

inline DiffusionResult diffusion_step(const DiffusionState& s, double dt, DiffusionMode mode = DiffusionMode::explicit_euler) {
  s.grid.validate();
  if (s.rho.size() != s.grid.cells()) throw std::invalid_argument("density array does not match the grid");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(s.d_diff >= 0.0)) throw std::invalid_argument("diffusion coefficient must be non-negative");
  DiffusionResult r{s, {}};
  const auto& g = s.grid;
  if (mode == DiffusionMode::explicit_euler) {
    const double h = g.min_spacing();
    const double num = dt * s.d_diff / (h * h);
    if (num > 0.25) throw StabilityError("explicit diffusion number " + std::to_string(num) + " exceeds 0.25");
    for (std::size_t i = 0; i < g.cells(); ++i) {
      double lap = 0.0;
      for (int k = 0; k < g.dx; ++k) {
        const double hk = g.spacing(k);
        lap += (s.rho[g.neighbor(i, k, 1)] - 2.0 * s.rho[i] + s.rho[g.neighbor(i, k, -1)]) / (hk * hk);
      }
      r.state.rho[i] = s.rho[i] + dt * s.d_diff * lap;
    }
  } else {
    detail::trapezoidal_heat(r.state, dt);
  }
  r.state.time = s.time + dt;
  r.velocity = diffusion_velocity(r.state);
  return r;
}

// Periodic Gaussian of unit mass and variance var centred at x0 on [0, L).
inline double periodic_gaussian(double x, double x0, double var, double length) {
  const int images = 2 + static_cast<int>(std::ceil(6.0 * std::sqrt(var) / length));
  double v = 0.0;
  for (int k = -images; k <= images; ++k) {
    const double y = x - x0 + k * length;
    v += std::exp(-y * y / (2.0 * var));
  }
  return v / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace swarm
