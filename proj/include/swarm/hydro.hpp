#pragma once

#include <gsl/gsl_complex.h>
#include <gsl/gsl_complex_math.h>
#include <gsl/gsl_poly.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/coeffs.hpp"
#include "swarm/errors.hpp"
#include "swarm/parallel.hpp"
#include "swarm/reconstruction.hpp"
#include "swarm/spatial_grid.hpp"

namespace swarm {

struct FluidState {
  SpatialGrid grid;
  int vdim = 2;
  std::vector<double> rho;
  std::vector<double> mom;  // cell-major, vdim components per cell
  double time = 0.0;

  FluidState() = default;
  FluidState(const SpatialGrid& g, int velocity_dim)
      : grid(g), vdim(velocity_dim), rho(g.cells(), 0.0), mom(g.cells() * velocity_dim, 0.0) {}

  std::size_t cells() const { return rho.size(); }
  double velocity(std::size_t cell, int k) const { return mom[cell * vdim + k] / rho[cell]; }
  double speed(std::size_t cell) const {
    double s = 0.0;
    for (int k = 0; k < vdim; ++k) s += velocity(cell, k) * velocity(cell, k);
    return std::sqrt(s);
  }
  double mass() const {
    double s = 0.0;
    for (double r : rho) s += r;
    return s * grid.cell_volume();
  }
  std::vector<double> total_momentum() const {
    std::vector<double> m(vdim, 0.0);
    for (std::size_t i = 0; i < cells(); ++i)
      for (int k = 0; k < vdim; ++k) m[k] += mom[i * vdim + k];
    for (auto& x : m) x *= grid.cell_volume();
    return m;
  }
  void set(std::size_t cell, double density, const std::vector<double>& u) {
    rho[cell] = density;
    for (int k = 0; k < vdim; ++k) mom[cell * vdim + k] = density * u[k];
  }
};

// |u(t)|^2 for du/dt = -rate * u (|u|^2 - target_sq), u(0)^2 = q0.
inline double relaxed_speed_sq(double q0, double target_sq, double rate, double t) {
  if (q0 == 0.0 || rate == 0.0 || t == 0.0) return q0;
  if (target_sq > 0.0) {
    const double e = std::exp(-2.0 * target_sq * rate * t);
    return q0 * target_sq / ((target_sq - q0) * e + q0);
  }
  if (target_sq < 0.0) {
    const double s2 = -target_sq;
    const double e = std::exp(-2.0 * s2 * rate * t);
    return s2 * q0 * e / (s2 + q0 * (1.0 - e));
  }
  return q0 / (1.0 + 2.0 * rate * q0 * t);
}

struct HydroOptions {
  Reconstruction recon = Reconstruction::muscl_mc;
  TimeIntegrator integrator = TimeIntegrator::ssp_rk2;
  double cfl_max = 0.45;
  double parabolic_max = 0.25;
  int threads = 1;
};

// Coefficients of the momentum equation as the discretisation sees them.
struct HydroModel {
  int dim = 2;
  double temp = 0.0;
  double convection = 1.0;      // weight of div(rho u x u)
  double pressure_beta = 0.0;   // pressure T rho - beta rho (shift + |u|^2)
  double pressure_shift = 0.0;  // (d+2) T - a^2
  double target_sq = 0.0;       // relaxation target for |u|^2
  double rate = 0.0;            // relaxation rate
  double viscosity = 0.0;       // eps * mu
  double nonlocal = 0.0;        // eps * k_R / sigma
  double propulsion_force = 0.0;  // alpha / 2
  bool corrections = false;

  double pressure(double rho, double speed_sq) const {
    return temp * rho - pressure_beta * rho * (pressure_shift + speed_sq);
  }
};

inline HydroModel euler_model(const DerivedCoefficients& c) {
  HydroModel m;
  const double a2 = c.params.a * c.params.a;
  m.dim = c.dim();
  m.temp = c.temp;
  m.target_sq = (1.0 - (m.dim + 2) * (c.temp / a2)) * a2;
  m.rate = std::isfinite(c.params.tau) ? 1.0 / (c.params.tau * a2) : 0.0;
  return m;
}

inline HydroModel ns_model(const DerivedCoefficients& c) {
  if (c.alpha * (c.dim() + 8) / 2.0 >= 1.0) throw RegimeError("eps * lambda (d+8)/2 >= 1: tau^eps not positive");
  if (c.eps == 0.0 && c.alpha == 0.0) return euler_model(c);
  HydroModel m;
  const double a2 = c.params.a * c.params.a;
  m.dim = c.dim();
  m.temp = c.temp;
  m.convection = c.lambda_eps;
  m.pressure_beta = 0.5 * c.alpha;
  m.pressure_shift = (m.dim + 2) * c.temp - a2;
  m.target_sq = c.relaxation_target_sq();
  m.rate = std::isfinite(c.tau_eps) ? c.relaxation_rate() : 0.0;
  m.viscosity = c.eps * c.mu;
  m.nonlocal = c.eps * c.k_r / c.params.sigma;
  m.propulsion_force = 0.5 * c.alpha;
  m.corrections = true;
  return m;
}

namespace detail {

// Spectral radius of the flux Jacobian along an axis, for normal velocity
// un and transverse speed ut.
inline double wave_speed(const HydroModel& m, double un, double ut) {
  if (m.convection == 1.0 && m.pressure_beta == 0.0) return std::abs(un) + std::sqrt(m.temp);
  const double lam = m.convection, beta = m.pressure_beta;
  const double a = m.temp - beta * m.pressure_shift + beta * (un * un + ut * ut) - lam * un * un;
  const double b = 2.0 * (lam - beta) * un, cc = -2.0 * beta * ut;
  const double d = -lam * un * ut, e = lam * ut, f = lam * un;
  gsl_complex z[3];
  gsl_poly_complex_solve_cubic(-(b + f), b * f - cc * e - a, a * f - cc * d, &z[0], &z[1], &z[2]);
  double r = std::abs(lam * un);
  for (const auto& zi : z) r = std::max(r, gsl_complex_abs(zi));
  return r;
}

struct Primitive {
  std::vector<double> rho, u;  // u cell-major
};

inline Primitive primitives(const FluidState& s) {
  Primitive p{s.rho, std::vector<double>(s.mom.size())};
  for (std::size_t i = 0; i < s.cells(); ++i) {
    if (!(s.rho[i] > 0.0)) throw VacuumError("non-positive density in cell " + std::to_string(i));
    for (int k = 0; k < s.vdim; ++k) p.u[i * s.vdim + k] = s.mom[i * s.vdim + k] / s.rho[i];
  }
  return p;
}

// Writes d(rho, rho u)/dt into rate_rho / rate_mom.
inline void hydro_rhs(const FluidState& s, const HydroModel& m, const HydroOptions& opt, std::vector<double>& rate_rho,
                      std::vector<double>& rate_mom) {
  const auto& g = s.grid;
  const int vd = s.vdim;
  const std::size_t n = s.cells();
  const auto p = primitives(s);
  std::fill(rate_rho.begin(), rate_rho.end(), 0.0);
  std::fill(rate_mom.begin(), rate_mom.end(), 0.0);
  const int nq = vd + 1;

  for (int axis = 0; axis < g.dx; ++axis) {
    const double h = g.spacing(axis);
    // face flux between cell i and its + neighbour, stored at i
    std::vector<double> flux(n * nq);
    parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
      std::vector<double> ql(nq), qr(nq), fl(nq), fr(nq), ul(nq), ur(nq);
      for (std::size_t i = b; i < e; ++i) {
        const std::size_t il = g.neighbor(i, axis, -1), j = g.neighbor(i, axis, 1), jr = g.neighbor(j, axis, 1);
        auto prim = [&](std::size_t c, int q) { return q == 0 ? p.rho[c] : p.u[c * vd + q - 1]; };
        for (int q = 0; q < nq; ++q) {
          const double si = limited_slope(opt.recon, prim(i, q) - prim(il, q), prim(j, q) - prim(i, q));
          const double sj = limited_slope(opt.recon, prim(j, q) - prim(i, q), prim(jr, q) - prim(j, q));
          ql[q] = prim(i, q) + 0.5 * si;
          qr[q] = prim(j, q) - 0.5 * sj;
        }
        if (!(ql[0] > 0.0) || !(qr[0] > 0.0)) throw VacuumError("non-positive reconstructed density");
        auto physical = [&](const std::vector<double>& q, std::vector<double>& f, std::vector<double>& u) {
          double sp = 0.0, ut = 0.0;
          for (int k = 0; k < vd; ++k) sp += q[k + 1] * q[k + 1];
          const double un = q[axis + 1];
          ut = std::sqrt(std::max(0.0, sp - un * un));
          const double pr = m.pressure(q[0], sp);
          f[0] = q[0] * un;
          u[0] = q[0];
          for (int k = 0; k < vd; ++k) {
            f[k + 1] = m.convection * q[0] * un * q[k + 1] + (k == axis ? pr : 0.0);
            u[k + 1] = q[0] * q[k + 1];
          }
          return wave_speed(m, un, ut);
        };
        const double sl = physical(ql, fl, ul), sr = physical(qr, fr, ur);
        const double smax = std::max(sl, sr);
        for (int q = 0; q < nq; ++q) flux[i * nq + q] = 0.5 * (fl[q] + fr[q]) - 0.5 * smax * (ur[q] - ul[q]);
      }
    });
    parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const std::size_t il = g.neighbor(i, axis, -1);
        rate_rho[i] -= (flux[i * nq] - flux[il * nq]) / h;
        for (int k = 0; k < vd; ++k) rate_mom[i * vd + k] -= (flux[i * nq + k + 1] - flux[il * nq + k + 1]) / h;
      }
    });
  }

  if (!m.corrections) return;
  // Central derivative of primitive component q (0 = rho) along axis.
  auto central = [&](std::size_t c, int axis, int q) {
    if (axis >= g.dx) return 0.0;
    const std::size_t a = g.neighbor(c, axis, 1), b = g.neighbor(c, axis, -1);
    auto v = [&](std::size_t x) { return q == 0 ? p.rho[x] : p.u[x * vd + q - 1]; };
    return (v(a) - v(b)) / (2.0 * g.spacing(axis));
  };
  parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double r = p.rho[i];
      double div_u = 0.0;
      for (int k = 0; k < g.dx; ++k) div_u += central(i, k, k + 1);
      for (int j = 0; j < vd; ++j) {
        double visc = 0.0, lap = 0.0, grad_rho_dot = 0.0, adv = 0.0;
        for (int k = 0; k < g.dx; ++k) {
          const double h = g.spacing(k);
          const std::size_t ip = g.neighbor(i, k, 1), im = g.neighbor(i, k, -1);
          const double uj = p.u[i * vd + j], ujp = p.u[ip * vd + j], ujm = p.u[im * vd + j];
          lap += (ujp - 2.0 * uj + ujm) / (h * h);
          grad_rho_dot += central(i, k, 0) * central(i, k, j + 1);
          adv += p.u[i * vd + k] * central(i, k, j + 1);
          // rho E(u) flux through the two faces normal to k, component (k, j)
          auto face = [&](std::size_t lo, std::size_t hi) {
            const double rf = 0.5 * (p.rho[lo] + p.rho[hi]);
            const double dk_uj = (p.u[hi * vd + j] - p.u[lo * vd + j]) / h;
            double dj_uk = 0.0;
            if (j == k) dj_uk = dk_uj;
            else if (j < g.dx) dj_uk = 0.5 * (central(lo, j, k + 1) + central(hi, j, k + 1));
            return rf * 0.5 * (dk_uj + dj_uk);
          };
          visc += (face(i, ip) - face(im, i)) / h;
        }
        double grad_half_sq = 0.0;
        if (j < g.dx) {
          for (int k = 0; k < vd; ++k) grad_half_sq += p.u[i * vd + k] * central(i, j, k + 1);
        }
        rate_mom[i * vd + j] += m.viscosity * visc + m.nonlocal * (r * lap + 2.0 * grad_rho_dot) +
                                m.propulsion_force * r * (div_u * p.u[i * vd + j] + grad_half_sq + adv);
      }
    }
  });
}

inline void relax_source(FluidState& s, const HydroModel& m, double t) {
  if (m.rate == 0.0) return;
  for (std::size_t i = 0; i < s.cells(); ++i) {
    double q0 = 0.0;
    for (int k = 0; k < s.vdim; ++k) {
      const double u = s.mom[i * s.vdim + k] / s.rho[i];
      q0 += u * u;
    }
    if (q0 == 0.0) continue;
    const double f = std::sqrt(relaxed_speed_sq(q0, m.target_sq, m.rate, t) / q0);
    for (int k = 0; k < s.vdim; ++k) s.mom[i * s.vdim + k] *= f;
  }
}

inline double max_wave_speed(const FluidState& s, const HydroModel& m) {
  double v = 0.0;
  for (std::size_t i = 0; i < s.cells(); ++i) {
    const double sp = s.speed(i);
    v = std::max(v, sp + std::sqrt(m.temp));
    for (int axis = 0; axis < s.grid.dx; ++axis) {
      const double un = s.velocity(i, axis);
      v = std::max(v, wave_speed(m, un, std::sqrt(std::max(0.0, sp * sp - un * un))));
    }
  }
  return v;
}

inline double parabolic_coefficient(const HydroModel& m) { return m.viscosity + m.nonlocal; }

inline void check_state(const FluidState& s, const HydroModel& m) {
  s.grid.validate();
  if (s.vdim != m.dim) throw std::invalid_argument("state has " + std::to_string(s.vdim) +
                                                   " velocity components, model dimension is " +
                                                   std::to_string(m.dim));
  if (s.grid.dx > s.vdim) throw std::invalid_argument("spatial dimension exceeds velocity dimension");
  if (s.rho.size() != s.grid.cells() || s.mom.size() != s.grid.cells() * s.vdim)
    throw std::invalid_argument("state arrays do not match the grid");
}

inline FluidState step(const FluidState& s, const HydroModel& m, double dt, const HydroOptions& opt) {
  check_state(s, m);
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  for (double r : s.rho)
    if (!(r > 0.0)) throw VacuumError("non-positive density");
  const double h = s.grid.min_spacing();
  const double cfl = dt * max_wave_speed(s, m) / h;
  if (cfl > opt.cfl_max) throw StabilityError("CFL number " + std::to_string(cfl) + " exceeds " + std::to_string(opt.cfl_max));
  const double par = dt * parabolic_coefficient(m) / (h * h);
  if (par > opt.parabolic_max)
    throw StabilityError("parabolic number " + std::to_string(par) + " exceeds " + std::to_string(opt.parabolic_max));

  FluidState u = s;
  relax_source(u, m, 0.5 * dt);
  std::vector<double> rr(u.rho.size()), rm(u.mom.size());
  auto euler_stage = [&](const FluidState& in) {
    FluidState out = in;
    hydro_rhs(in, m, opt, rr, rm);
    for (std::size_t i = 0; i < out.rho.size(); ++i) out.rho[i] += dt * rr[i];
    for (std::size_t i = 0; i < out.mom.size(); ++i) out.mom[i] += dt * rm[i];
    return out;
  };
  FluidState v = euler_stage(u);
  if (opt.integrator == TimeIntegrator::ssp_rk2) {
    const FluidState w = euler_stage(v);
    for (std::size_t i = 0; i < v.rho.size(); ++i) v.rho[i] = 0.5 * (u.rho[i] + w.rho[i]);
    for (std::size_t i = 0; i < v.mom.size(); ++i) v.mom[i] = 0.5 * (u.mom[i] + w.mom[i]);
  }
  for (std::size_t i = 0; i < v.rho.size(); ++i)
    if (!(v.rho[i] > 0.0)) throw VacuumError("density became non-positive in cell " + std::to_string(i));
  relax_source(v, m, 0.5 * dt);
  v.time = s.time + dt;
  return v;
}

}  // namespace detail

inline FluidState euler_step(const FluidState& s, const DerivedCoefficients& c, double dt, const HydroOptions& opt = {}) {
  return detail::step(s, euler_model(c), dt, opt);
}

inline FluidState ns_step(const FluidState& s, const DerivedCoefficients& c, double dt, const HydroOptions& opt = {}) {
  return detail::step(s, ns_model(c), dt, opt);
}

enum class HydroSolver { euler, navier_stokes };

struct HydroRunOptions {
  HydroOptions step;
  double dt = 0.0;                  // 0: choose from stability limits every step
  double cfl_target = 0.4;
  double relax_resolution = 0.2;    // dt * (linearised relaxation rate) when dt is automatic; 0 disables
  double snapshot_every = 0.0;      // 0: no snapshots besides the final state
  std::function<void(const FluidState&)> observer;
};

inline HydroModel hydro_model(const DerivedCoefficients& c, HydroSolver solver) {
  return solver == HydroSolver::euler ? euler_model(c) : ns_model(c);
}

inline double stable_dt(const FluidState& s, const HydroModel& m, const HydroRunOptions& opt) {
  const double h = s.grid.min_spacing();
  double dt = opt.cfl_target * h / detail::max_wave_speed(s, m);
  const double nu = detail::parabolic_coefficient(m);
  if (nu > 0.0) dt = std::min(dt, 0.9 * opt.step.parabolic_max * h * h / nu);
  const double relax = 2.0 * std::abs(m.target_sq) * m.rate;
  if (opt.relax_resolution > 0.0 && relax > 0.0) dt = std::min(dt, opt.relax_resolution / relax);
  return dt;
}

// Advances to t_end, calling the observer at t0, at every snapshot time and
// at t_end. Returns the final state.
inline FluidState integrate(FluidState s, const DerivedCoefficients& c, HydroSolver solver, double t_end,
                            const HydroRunOptions& opt = {}) {
  const HydroModel m = hydro_model(c, solver);
  double next_snap = opt.snapshot_every > 0.0 ? s.time + opt.snapshot_every : std::numeric_limits<double>::infinity();
  const double tol = 1e-12 * std::max(1.0, std::abs(t_end));
  if (opt.observer) opt.observer(s);
  bool end_seen = s.time >= t_end - tol;
  while (s.time < t_end - tol) {
    double dt = opt.dt > 0.0 ? opt.dt : stable_dt(s, m, opt);
    dt = std::min({dt, t_end - s.time, next_snap - s.time});
    s = detail::step(s, m, dt, opt.step);
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

// Speed of a tracked feature in a quasi-1D history: the maximum of the
// selected field (sub-cell by parabolic fit), optionally restricted to the
// window [x_lo, x_hi] of the initial snapshot that moves with the feature,
// unwrapped across the periodic boundary and fitted by least squares.
struct FrontTracking {
  std::function<double(const FluidState&, std::size_t)> field;
  std::optional<std::pair<double, double>> window;
};

inline double track_peak(const std::vector<double>& v, double h, double length, std::optional<std::pair<double, double>> window) {
  const int n = static_cast<int>(v.size());
  int best = -1;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * h;
    if (window) {
      const double lo = window->first - length * std::floor(window->first / length);
      const double hi = lo + (window->second - window->first);
      const double xx = x < lo ? x + length : x;
      if (xx > hi) continue;
    }
    if (best < 0 || v[i] > v[best]) best = i;
  }
  if (best < 0) throw std::invalid_argument("tracking window contains no cell");
  const double fm = v[(best + n - 1) % n], f0 = v[best], fp = v[(best + 1) % n];
  const double den = fm - 2.0 * f0 + fp;
  const double shift = den < 0.0 ? std::clamp(0.5 * (fm - fp) / den, -0.5, 0.5) : 0.0;
  return (best + 0.5 + shift) * h;
}

// Least-squares speed of the tracked peak in a sequence of periodic 1D
// profiles on cells of width h.
inline double fit_front_speed(const std::vector<double>& times, const std::vector<std::vector<double>>& profiles, double h,
                              std::optional<std::pair<double, double>> window = std::nullopt) {
  if (times.size() < 3 || profiles.size() != times.size())
    throw std::invalid_argument("front tracking needs at least 3 snapshots");
  const double length = h * static_cast<double>(profiles.front().size());
  std::vector<double> x;
  double prev = 0.0;
  for (std::size_t s = 0; s < profiles.size(); ++s) {
    const auto& v = profiles[s];
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) throw std::domain_error("field is flat; no feature to track");
    double pos = track_peak(v, h, length, window);
    if (s > 0) {
      while (pos - prev > 0.5 * length) pos -= length;
      while (pos - prev < -0.5 * length) pos += length;
      if (window) window = std::make_pair(window->first + pos - prev, window->second + pos - prev);
    }
    prev = pos;
    x.push_back(pos);
  }
  const double n = static_cast<double>(times.size());
  double st = 0, sx = 0, stt = 0, stx = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    st += times[i];
    sx += x[i];
    stt += times[i] * times[i];
    stx += times[i] * x[i];
  }
  const double den = n * stt - st * st;
  if (!(den > 0.0)) throw std::invalid_argument("front tracking needs distinct snapshot times");
  return (n * stx - st * sx) / den;
}

inline double measure_front_speed(const std::vector<FluidState>& history, const FrontTracking& tracking) {
  if (history.empty()) throw std::invalid_argument("front tracking needs at least 3 snapshots");
  if (history.front().grid.dx != 1) throw std::invalid_argument("front tracking needs a quasi-1D run");
  std::vector<double> times;
  std::vector<std::vector<double>> profiles;
  for (const auto& st : history) {
    std::vector<double> v(st.cells());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = tracking.field(st, i);
    times.push_back(st.time);
    profiles.push_back(std::move(v));
  }
  return fit_front_speed(times, profiles, history.front().grid.spacing(0), tracking.window);
}

}  // namespace swarm
