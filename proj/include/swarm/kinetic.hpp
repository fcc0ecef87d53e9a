#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/coeffs.hpp"
#include "swarm/errors.hpp"
#include "swarm/velocity_grid.hpp"

namespace swarm {

struct DistributionFunction {
  VelocityGrid grid;
  std::vector<double> values;

  DistributionFunction() = default;
  explicit DistributionFunction(const VelocityGrid& g) : grid(g), values(g.size(), 0.0) {}

  double mass() const {
    double s = 0.0;
    for (double x : values) s += x;
    return s * grid.cell_volume();
  }
  std::array<double, 3> momentum() const {
    std::array<double, 3> m{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto v = grid.velocity(i);
      for (int k = 0; k < grid.dim; ++k) m[k] += values[i] * v[k];
    }
    for (auto& x : m) x *= grid.cell_volume();
    return m;
  }
  // u_f by midpoint quadrature.
  std::array<double, 3> mean_velocity() const {
    const double m = mass();
    if (!(m > 0.0)) throw std::domain_error("distribution has zero mass; mean velocity undefined");
    auto p = momentum();
    for (auto& x : p) x /= m;
    return p;
  }
  double mean_speed() const {
    const auto u = mean_velocity();
    return std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  }
};

inline double maxwellian(const std::array<double, 3>& v, const std::array<double, 3>& u, double temp, int dim) {
  double w2 = 0.0;
  for (int k = 0; k < dim; ++k) w2 += (v[k] - u[k]) * (v[k] - u[k]);
  return std::pow(2.0 * std::numbers::pi * temp, -0.5 * dim) * std::exp(-0.5 * w2 / temp);
}

inline DistributionFunction sample_maxwellian(const VelocityGrid& grid, double rho, const std::array<double, 3>& u,
                                              double temp) {
  grid.validate(2);
  DistributionFunction f(grid);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = rho * maxwellian(grid.velocity(i), u, temp, grid.dim);
  return f;
}

// Indicator of a centred box of half-width `half`, normalised to mass rho.
inline DistributionFunction sample_uniform_box(const VelocityGrid& grid, double rho, double half) {
  grid.validate(2);
  DistributionFunction f(grid);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto v = grid.velocity(i);
    bool inside = true;
    for (int k = 0; k < grid.dim; ++k) inside = inside && std::abs(v[k]) <= half;
    f.values[i] = inside ? 1.0 : 0.0;
  }
  const double m = f.mass();
  if (!(m > 0.0)) throw std::invalid_argument("uniform box contains no grid cell");
  for (auto& x : f.values) x *= rho / m;
  return f;
}

// Free energy sum f ln(f / M_{u_f}) h^d with the Maxwellian at temperature T.
inline double free_energy(const DistributionFunction& f, double temp) {
  if (!(temp > 0.0)) throw std::invalid_argument("free energy needs T > 0");
  const auto u = f.mean_velocity();
  const int d = f.grid.dim;
  const double log_norm = 0.5 * d * std::log(2.0 * std::numbers::pi * temp);
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double x = f.values[i];
    if (x <= 0.0) continue;
    const auto v = f.grid.velocity(i);
    double w2 = 0.0;
    for (int k = 0; k < d; ++k) w2 += (v[k] - u[k]) * (v[k] - u[k]);
    s += x * (std::log(x) + log_norm + 0.5 * w2 / temp);
  }
  return s * f.grid.cell_volume();
}

namespace detail {

// Adds scale * (collision flux divergence along axis k) of f to out.
inline void add_collision_axis(const DistributionFunction& f, const std::array<double, 3>& u, double sigma, double diff,
                               int k, double scale, std::vector<double>& out) {
  const auto& g = f.grid;
  const double h = g.spacing();
  const std::size_t st = g.stride(k);
  const int n = g.n;
  const std::size_t lines = g.size() / n;
  for (std::size_t line = 0; line < lines; ++line) {
    // base index of the line: decompose line over the other axes
    const std::size_t lo = line % st, hi = line / st;
    const std::size_t base = lo + hi * st * n;
    double flux_left = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = base + i * st;
      double flux_right = 0.0;
      if (i + 1 < n) {
        const double vf = g.center(i) + 0.5 * h;
        const double a = f.values[idx], b = f.values[idx + st];
        flux_right = (vf - u[k]) / sigma * 0.5 * (a + b) + diff * (b - a) / h;
      }
      out[idx] += scale * (flux_right - flux_left) / h;
      flux_left = flux_right;
    }
  }
}

// Divergence of the self-propulsion drift (1 - |v|^2/a^2) v / tau,
// subtracted (times scale) from out. Faces with cell Peclet number
// |speed| h / diff <= 2 use the central average, the rest upwind.
inline void add_propulsion(const DistributionFunction& f, double a, double tau, double diff, double scale,
                           std::vector<double>& out) {
  if (!std::isfinite(tau)) return;
  const auto& g = f.grid;
  const double h = g.spacing();
  const int n = g.n;
  for (int k = 0; k < g.dim; ++k) {
    const std::size_t st = g.stride(k);
    const std::size_t lines = g.size() / n;
    for (std::size_t line = 0; line < lines; ++line) {
      const std::size_t lo = line % st, hi = line / st;
      const std::size_t base = lo + hi * st * n;
      // transverse speed squared is constant along the line
      const auto v0 = g.velocity(base);
      double perp2 = 0.0;
      for (int j = 0; j < g.dim; ++j)
        if (j != k) perp2 += v0[j] * v0[j];
      double flux_left = 0.0;
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = base + i * st;
        double flux_right = 0.0;
        if (i + 1 < n) {
          const double vf = g.center(i) + 0.5 * h;
          const double speed = (1.0 - (perp2 + vf * vf) / (a * a)) * vf / tau;
          if (std::abs(speed) * h <= 2.0 * diff)
            flux_right = speed * 0.5 * (f.values[idx] + f.values[idx + st]);
          else
            flux_right = speed * (speed > 0.0 ? f.values[idx] : f.values[idx + st]);
        }
        out[idx] -= scale * (flux_right - flux_left) / h;
        flux_left = flux_right;
      }
    }
  }
}

inline double max_propulsion_speed(const VelocityGrid& g, double a, double tau) {
  if (!std::isfinite(tau)) return 0.0;
  double vm = g.v_max;
  const double r2 = g.dim * vm * vm;
  // |(1 - |v|^2/a^2) v_k| is bounded by (1 + r2/a^2) vm on the box
  return (1.0 + r2 / (a * a)) * vm / tau;
}

// Solves (I - c A_k) x = rhs along every line of axis k, A_k the collision
// operator along k with frozen u; x overwrites rhs.
inline void implicit_collision_axis(const VelocityGrid& g, const std::array<double, 3>& u, double sigma, double diff,
                                    int k, double c, std::vector<double>& rhs) {
  const double h = g.spacing();
  const std::size_t st = g.stride(k);
  const int n = g.n;
  const std::size_t lines = g.size() / n;
  std::vector<double> lower(n), diag(n), upper(n), x(n), cp(n), dp(n);
  for (std::size_t line = 0; line < lines; ++line) {
    const std::size_t lo = line % st, hi = line / st;
    const std::size_t base = lo + hi * st * n;
    for (int i = 0; i < n; ++i) {
      // flux F_{i+1/2} = p_i f_i + q_i f_{i+1}
      double pl = 0.0, ql = 0.0, pr = 0.0, qr = 0.0;
      if (i > 0) {
        const double cf = (g.center(i) - 0.5 * h - u[k]) / sigma;
        pl = 0.5 * cf - diff / h;
        ql = 0.5 * cf + diff / h;
      }
      if (i + 1 < n) {
        const double cf = (g.center(i) + 0.5 * h - u[k]) / sigma;
        pr = 0.5 * cf - diff / h;
        qr = 0.5 * cf + diff / h;
      }
      // (A f)_i = (pr f_i + qr f_{i+1} - pl f_{i-1} - ql f_i) / h
      lower[i] = c * pl / h;
      diag[i] = 1.0 - c * (pr - ql) / h;
      upper[i] = -c * qr / h;
      x[i] = rhs[base + i * st];
    }
    cp[0] = upper[0] / diag[0];
    dp[0] = x[0] / diag[0];
    for (int i = 1; i < n; ++i) {
      const double m = diag[i] - lower[i] * cp[i - 1];
      cp[i] = upper[i] / m;
      dp[i] = (x[i] - lower[i] * dp[i - 1]) / m;
    }
    x[n - 1] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
    for (int i = 0; i < n; ++i) rhs[base + i * st] = x[i];
  }
}

}  // namespace detail

// Discrete Q(f) in divergence form with zero flux at the box edge.
inline DistributionFunction apply_q(const DistributionFunction& f, const ModelParams& p) {
  f.grid.validate(2);
  const auto u = f.mean_velocity();
  DistributionFunction q(f.grid);
  for (int k = 0; k < f.grid.dim; ++k) detail::add_collision_axis(f, u, p.sigma, p.diff, k, 1.0, q.values);
  return q;
}

enum class RelaxMode { explicit_euler, semi_implicit };

struct RelaxOptions {
  RelaxMode mode = RelaxMode::explicit_euler;
  // Called after every step with the current time and state.
  std::function<void(double, const DistributionFunction&)> observer;
};

namespace detail {

inline DistributionFunction integrate_kinetic(DistributionFunction f, const ModelParams& p, double collision_scale,
                                              bool propulsion, double t_end, double dt, const RelaxOptions& opt) {
  p.validate();
  const auto& g = f.grid;
  g.validate(2);
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be non-negative");
  const double h = g.spacing();
  const int d = g.dim;
  if (opt.mode == RelaxMode::explicit_euler) {
    const double diff = p.diff * collision_scale;
    const double lim_diff = diff > 0.0 ? h * h / (2.0 * d * diff) : std::numeric_limits<double>::infinity();
    const double lim_drift = p.sigma / collision_scale * h / (2.0 * g.v_max);
    const double lim = std::min(lim_diff, lim_drift);
    if (dt > lim * (1.0 + 1e-12))
      throw StabilityError("explicit relaxation unstable: dt = " + std::to_string(dt) + " exceeds " +
                           std::to_string(lim));
  }
  if (propulsion) {
    const double speed = max_propulsion_speed(g, p.a, p.tau);
    if (dt * speed / h > 1.0 / d)
      throw StabilityError("propulsion advection unstable: dt * max speed / h = " + std::to_string(dt * speed / h));
  }
  const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
  double t = 0.0;
  std::vector<double> rate(g.size());
  for (int s = 0; s < steps; ++s) {
    const double step = std::min(dt, t_end - t);
    const auto u = f.mean_velocity();
    std::fill(rate.begin(), rate.end(), 0.0);
    for (int k = 0; k < d; ++k) add_collision_axis(f, u, p.sigma, p.diff, k, collision_scale, rate);
    if (propulsion) add_propulsion(f, p.a, p.tau, p.diff * collision_scale, 1.0, rate);
    if (opt.mode == RelaxMode::explicit_euler) {
      for (std::size_t i = 0; i < rate.size(); ++i) f.values[i] += step * rate[i];
    } else {
      // Douglas splitting with theta = 1: the steady state is that of the
      // unsplit operator.
      std::vector<double> y(f.values);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += step * rate[i];
      for (int k = 0; k < d; ++k) {
        std::vector<double> ak(g.size(), 0.0);
        add_collision_axis(f, u, p.sigma, p.diff, k, collision_scale, ak);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= step * ak[i];
        implicit_collision_axis(g, u, p.sigma, p.diff, k, step * collision_scale,
                                y);
      }
      f.values.swap(y);
    }
    t += step;
    if (opt.observer) opt.observer(t, f);
  }
  return f;
}

}  // namespace detail

// Integrates df/dt = Q(f) to t_end.
inline DistributionFunction relax(const DistributionFunction& f0, const ModelParams& p, double t_end, double dt,
                                  const RelaxOptions& opt = {}) {
  return detail::integrate_kinetic(f0, p, 1.0, false, t_end, dt, opt);
}

// Integrates df/dt = Q(f)/eps - div_v((1 - |v|^2/a^2) v f / tau) to t_end.
inline DistributionFunction relax_with_propulsion(const DistributionFunction& f0, const ModelParams& p, double eps,
                                                  double t_end, double dt, const RelaxOptions& opt = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  return detail::integrate_kinetic(f0, p, 1.0 / eps, true, t_end, dt, opt);
}

}  // namespace swarm
