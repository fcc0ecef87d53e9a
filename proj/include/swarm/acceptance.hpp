#pragma once

#include <chrono>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/closure.hpp"
#include "swarm/coeffs.hpp"
#include "swarm/harness.hpp"
#include "swarm/kinetic.hpp"

namespace swarm::acceptance {

struct Settings {
  int threads = 1;
};

namespace detail {

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Collects named checks; the measured string lists every value.
struct Checks {
  bool ok = true;
  std::ostringstream text;

  void check(const std::string& name, bool pass, const std::string& detail) {
    if (text.tellp() > 0) text << "; ";
    text << name << ' ' << detail << (pass ? "" : " [fail]");
    ok = ok && pass;
  }
  void le(const std::string& name, double value, double limit) {
    check(name, value <= limit, fmt_num(value, 4) + " <= " + fmt_num(limit, 4));
  }
  void ge(const std::string& name, double value, double limit) {
    check(name, value >= limit, fmt_num(value, 4) + " >= " + fmt_num(limit, 4));
  }
};

inline CriterionResult finish(int id, const std::string& name, Checks& c, const Timer& t, double budget) {
  const double secs = t.seconds();
  c.le("runtime_s", secs, budget);
  return {id, name, c.ok, c.text.str(), secs};
}

inline ModelParams unit_params(double diff, double tau = 1.0, int dim = 2) {
  ModelParams p;
  p.a = 1.0;
  p.sigma = 1.0;
  p.diff = diff;
  p.tau = tau;
  p.dim = dim;
  return p;
}

}  // namespace detail

// Coefficients: chi at eps = 0, c2 = (1 - 3 alpha / 2) c1, monotone c1 and
// T_c over the closed alpha range.
inline CriterionResult coefficients(const Settings& = {}) {
  detail::Timer timer;
  detail::Checks c;
  bool chi_exact = true, c2_exact = true, mono = true, range = true;
  for (int d : {1, 2, 3})
    for (double a : {0.5, 1.0, 2.0})
      for (double frac : {0.05, 0.3, 0.6, 0.9}) {
        ModelParams p = detail::unit_params(0.0, 0.7, d);
        p.a = a;
        p.sigma = 1.3;
        const double tc = a * a / (d + 2);
        p.diff = frac * tc / p.sigma;
        const auto c0 = derive(p);
        chi_exact = chi_exact && c0.chi_eps == 1.0 - (d + 2) * (p.temperature() / (a * a));
        for (double alpha : {0.01, 0.05, 0.1}) {
          if (alpha >= max_alpha(d)) continue;
          const auto ca = derive_with_alpha(p, alpha);
          if (ca.c1_alpha) c2_exact = c2_exact && *ca.c2_alpha == (1.0 - 1.5 * alpha) * *ca.c1_alpha;
        }
        std::vector<double> alphas;
        for (int k = 0; k < 40; ++k) alphas.push_back(max_alpha(d) * k / 40.0);
        alphas.push_back(max_alpha(d));
        mono = mono && c1_increasing_check(p, alphas);
        double prev = -1.0;
        for (double al : alphas) {
          const double t = critical_temperature_alpha(a, d, al);
          mono = mono && t > prev;
          range = range && t >= tc * (1.0 - 1e-15) && t <= 1.5 * tc * (1.0 + 1e-15);
          prev = t;
        }
        range = range && std::abs(critical_temperature_alpha(a, d, max_alpha(d)) - 1.5 * tc) <= 1e-14 * tc;
      }
  c.check("chi_at_eps0_exact", chi_exact, chi_exact ? "equal" : "differs");
  c.check("c2_relation_exact", c2_exact, c2_exact ? "equal" : "differs");
  c.check("c1_Tc_increasing", mono, mono ? "yes" : "no");
  c.check("Tc_range", range, range ? "[Tc(0), 1.5 Tc(0)]" : "outside");
  return detail::finish(1, "coefficient suite", c, timer, 1.0);
}

// Collision operator: invariants by exact quadrature, second-order null-space
// residual, monotone free energy at 128^2 cells.
inline CriterionResult collision_operator(const Settings& = {}) {
  detail::Timer timer;
  detail::Checks c;
  double inv = 0.0;
  {
    ModelParams p = detail::unit_params(0.4);
    p.sigma = 0.8;
    const auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
    const std::vector<Polynomial> tests = {Polynomial::constant(2, 1.0) + 0.3 * x,
                                           Polynomial::constant(2, 2.0) + x * y - 0.2 * y * y * y + 0.1 * x * x * x * x,
                                           Polynomial::constant(2, 1.0) + 0.5 * x * x - 0.4 * y};
    for (const auto& phi : tests) inv = std::max(inv, check_collision_invariants(phi, {0.3, -0.2}, p, 1.0).max_residual());
    ModelParams q = detail::unit_params(0.3, 1.0, 3);
    q.sigma = 1.1;
    const auto z = Polynomial::variable(3, 2), xx = Polynomial::variable(3, 0);
    inv = std::max(inv, check_collision_invariants(Polynomial::constant(3, 1.0) + 0.2 * z * xx + 0.1 * z * z * z,
                                                   {0.1, 0.2, -0.3}, q, 1.0)
                            .max_residual());
  }
  c.le("invariant_residual", inv, 1e-12);

  const auto p = detail::unit_params(0.25);
  std::vector<double> res;
  for (int n : {32, 64, 128}) {
    VelocityGrid g{4.0, n, 2};
    const auto f = sample_maxwellian(g, 1.3, {0.4, -0.3, 0.0}, p.temperature());
    const auto q = apply_q(f, p);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      num = std::max(num, std::abs(q.values[i]));
      den = std::max(den, std::abs(f.values[i]));
    }
    res.push_back(num / den);
  }
  const double order = std::min(std::log2(res[0] / res[1]), std::log2(res[1] / res[2]));
  c.check("kernel_residual_order", std::abs(order - 2.0) <= 0.2, fmt_num(order, 4) + " ~ 2");

  VelocityGrid g{4.0, 128, 2};
  auto f0 = sample_maxwellian(g, 0.7, {0.6, -0.2, 0.0}, 0.25);
  const auto f2 = sample_maxwellian(g, 0.3, {-0.8, 0.4, 0.0}, 0.15);
  for (std::size_t i = 0; i < f0.values.size(); ++i) f0.values[i] += f2.values[i];
  const double h = g.spacing();
  const double dt = 0.9 * std::min(h * h / (4.0 * p.diff), p.sigma * h / (2.0 * g.v_max));
  double prev = free_energy(f0, p.temperature()), worst = -1.0;
  RelaxOptions opt;
  opt.observer = [&](double, const DistributionFunction& f) {
    const double e = free_energy(f, p.temperature());
    worst = std::max(worst, e - prev);
    prev = e;
  };
  relax(f0, p, 1.0, dt, opt);
  c.le("free_energy_increase_per_step", worst, 1e-8);
  return detail::finish(2, "collision operator suite", c, timer, 30.0);
}

// Closure: solvability and pseudo-inverse residuals, moment formulas, kernel
// expansion order.
inline CriterionResult closure(const Settings& = {}) {
  detail::Timer timer;
  detail::Checks c;
  double solv = 0.0, pinv = 0.0;
  std::size_t solv_rows = 0, pinv_rows = 0;
  for (int d : {2, 3}) {
    const double t = 0.25;
    const auto set = make_closure_functions(t, 1.0, d);
    const auto s = check_solvability(set, 8);
    solv = std::max(solv, s.max_residual());
    solv_rows += s.rows.size();
    VelocityGrid grid{6.0 * std::sqrt(t), 97, d};
    const auto pi = check_pseudo_inverse(set, grid);
    pinv = std::max(pinv, pi.max_residual());
    pinv_rows += pi.rows.size();
  }
  c.le("solvability_residual", solv, 1e-12);
  c.le("pseudo_inverse_residual", pinv, 1e-12);
  c.check("residual_count", solv_rows == 10 && pinv_rows == 10,
          std::to_string(solv_rows) + "+" + std::to_string(pinv_rows) + " rows");

  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  double moment = 0.0;
  for (int d : {2, 3}) {
    ModelParams p;
    p.a = 1.1;
    p.sigma = 1.3;
    p.diff = 0.25 / 1.3;
    p.tau = 0.7;
    p.dim = d;
    for (int trial = 0; trial < 20; ++trial) {
      LocalFlow flow;
      flow.rho = 0.5 + std::abs(n01(rng));
      for (int i = 0; i < d; ++i) {
        flow.u.push_back(0.5 * n01(rng));
        flow.grad_rho.push_back(n01(rng));
      }
      for (int i = 0; i < d * d; ++i) flow.grad_u.push_back(n01(rng));
      moment = std::max(moment, check_b1_b3(p, flow, 12).max_residual());
    }
  }
  c.le("moment_relative_error", moment, 1e-8);

  const auto rho = PeriodicField::trig(1.0, 0.1, 1), j = PeriodicField::trig(0.5, 0.2, 2, 0.3);
  const double order = kernel_expansion_study(normalized_kernel_moment(1), rho, j, 0.1, 3).min_order();
  c.ge("kernel_expansion_order", order, 3.5);
  return detail::finish(3, "closure suite", c, timer, 60.0);
}

// Uniform-state Euler against the closed-form speed curve.
inline CriterionResult relaxation_ode(const Settings& = {}) {
  detail::Timer timer;
  detail::Checks c;
  const double tau = 0.5;
  const auto ordered = derive(detail::unit_params(0.2, tau));
  const double target = *ordered.comfort_speed * *ordered.comfort_speed;
  double worst = 0.0, decayed = 0.0;
  for (int n : {8, 64}) {
    SpatialGrid g;
    g.nx = n;
    FluidState s(g, 2);
    for (std::size_t i = 0; i < s.cells(); ++i) s.set(i, 1.3, {0.05, 0.02});
    const double q0 = 0.05 * 0.05 + 0.02 * 0.02;
    for (int k = 0; k < 200; ++k) {
      s = euler_step(s, ordered, 0.01);
      const double ref = relaxed_speed_sq(q0, target, 1.0 / tau, s.time);
      for (std::size_t i = 0; i < s.cells(); ++i)
        worst = std::max(worst, std::abs(s.speed(i) * s.speed(i) - ref) / ref);
    }
    const auto hot = derive(detail::unit_params(0.5, tau));
    FluidState u(g, 2);
    for (std::size_t i = 0; i < u.cells(); ++i) u.set(i, 1.0, {0.3, -0.1});
    const double dt = 0.2 * g.spacing(0);
    while (u.time < 10.0) u = euler_step(u, hot, dt);
    for (std::size_t i = 0; i < u.cells(); ++i) decayed = std::max(decayed, u.speed(i));
  }
  c.le("ordered_relative_error", worst, 1e-6);
  c.le("disordered_final_speed", decayed, 1e-8);
  return detail::finish(4, "relaxation ODE", c, timer, 5.0);
}

// Diffusive limit of Euler at T = 0.5.
inline CriterionResult diffusive_limit(const Settings& = {}) {
  detail::Timer timer;
  detail::Checks c;
  const auto r = limit_study_tau(detail::unit_params(0.5), {0.1, 0.01, 0.001}, LimitBranch::diffusive);
  std::ostringstream all;
  for (const auto& row : r.rows) all << (all.tellp() > 0 ? "/" : "") << fmt_num(row.rho_distance, 3);
  c.le("L1_at_tau_1e-3", r.rows.back().rho_distance, 0.05);
  c.check("decreasing_over_tau", r.decreasing, all.str());
  return detail::finish(5, "diffusive limit", c, timer, 120.0);
}

// Ordered (SOH) limit of Euler at T = 0.2.
inline CriterionResult soh_limit(const Settings& = {}) {
  detail::Timer timer;
  detail::Checks c;
  const auto r = limit_study_tau(detail::unit_params(0.2), {0.01, 0.001}, LimitBranch::ordered);
  const auto& row = r.rows.back();
  c.le("max_speed_gap", row.max_speed_gap, 1e-2);
  c.le("rho_L1", row.rho_distance, 0.05);
  c.le("omega_L1", row.omega_distance, 0.05);
  c.le("soh_norm_defect", row.norm_defect, 1e-12);
  return detail::finish(6, "SOH limit", c, timer, 120.0);
}

// Navier-Stokes fast relaxation at alpha = 0.1 against the alpha-SOH system.
inline CriterionResult alpha_splitting(const Settings& = {}) {
  detail::Timer timer;
  detail::Checks c;
  const double alpha = 0.1;
  const auto r = limit_study_alpha(detail::unit_params(0.2), alpha, {0.001});
  const double expect = 1.0 - 1.5 * alpha;
  c.le("speed_ratio_rel_error", std::abs(r.speed_ratio() - expect) / expect, 0.1);
  c.check("ratio", true, fmt_num(r.speed_ratio(), 4) + " vs " + fmt_num(expect, 4));
  c.le("rho_L1", r.rows.back().rho_distance, 0.05);
  c.le("omega_L1", r.rows.back().omega_distance, 0.05);
  return detail::finish(7, "alpha splitting", c, timer, 300.0);
}

// Particle suite: neighbour search, replay, fluid speed and phase sweep.
inline CriterionResult particle_suite(const Settings& s = {}) {
  detail::Timer timer;
  detail::Checks c;
  bool same = true;
  for (int dx : {1, 2})
    for (std::size_t n : {16u, 128u, 512u})
      for (double radius : {0.04, 0.13, 0.3}) {
        const auto st = uniform_particles(n, 1.0, dx, 2, 1000 + n + dx, {0.2, 0.0}, 1.0);
        same = same && neighbor_means(st, radius) == neighbor_means(st, radius, 1, n + 1);
      }
  c.check("cell_list_equals_all_pairs", same, same ? "exact" : "differs");

  ModelParams m = detail::unit_params(0.2);
  m.eps = 0.1;
  m.radius = 0.5;
  const auto pp = particle_params(m);
  auto replay = [&] {
    auto st = uniform_particles(500, 1.0, 2, 2, 99, {0.4, 0.0}, 0.4);
    ParticleRunOptions o;
    o.dt = 0.005;
    o.steps = 40;
    o.step.threads = s.threads;
    run_particles(st, pp, o);
    return st;
  };
  const auto r1 = replay(), r2 = replay();
  const bool identical =
      r1.velocities.size() == r2.velocities.size() &&
      std::memcmp(r1.velocities.data(), r2.velocities.data(), r1.velocities.size() * sizeof(double)) == 0 &&
      std::memcmp(r1.positions.data(), r2.positions.data(), r1.positions.size() * sizeof(double)) == 0;
  c.check("replay_identical", identical, identical ? "bytes equal" : "bytes differ");

  PhaseSweepSettings speed;
  speed.particles = 2048;
  speed.temp_ratios = {0.8};
  speed.threads = s.threads;
  const auto fluid = phase_sweep(m, speed);
  const double target = std::sqrt(m.a * m.a - (m.dim + 2) * m.temperature());
  c.le("fluid_speed_rel_error", std::abs(fluid.mean_fluid_speed[0] - target) / target, 0.1);

  PhaseSweepSettings sweep;
  sweep.threads = s.threads;
  const auto ph = phase_sweep(m, sweep);
  std::ostringstream curve;
  for (double phi : ph.mean_phi) curve << (curve.tellp() > 0 ? "/" : "") << fmt_num(phi, 3);
  c.check("phi_strictly_decreasing", ph.strictly_decreasing, curve.str());
  return detail::finish(8, "particle suite", c, timer, 600.0);
}

// Co-moving frame comparison for equal and unequal SOH speeds.
inline CriterionResult galilean_marker(const Settings& = {}) {
  detail::Timer timer;
  detail::Checks c;
  const double tol = 0.01;
  const double same = galilean_defect({1.0, 1.0, 0.05});
  const double split = galilean_defect({1.0, 0.85, 0.05});
  c.le("defect_equal_speeds", same, tol);
  c.ge("defect_unequal_speeds", split, 5.0 * tol);
  return detail::finish(9, "Galilean marker", c, timer, 60.0);
}

inline const std::vector<std::pair<int, std::function<CriterionResult(const Settings&)>>>& all_criteria() {
  static const std::vector<std::pair<int, std::function<CriterionResult(const Settings&)>>> list = {
      {1, coefficients},    {2, collision_operator}, {3, closure},        {4, relaxation_ode},  {5, diffusive_limit},
      {6, soh_limit},       {7, alpha_splitting},    {8, particle_suite}, {9, galilean_marker},
  };
  return list;
}

// Runs one criterion; an exception counts as a failure with its message.
inline CriterionResult run_criterion(int id, const Settings& s = {}) {
  for (const auto& [k, fn] : all_criteria()) {
    if (k != id) continue;
    try {
      return fn(s);
    } catch (const std::exception& e) {
      return {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0.0};
    }
  }
  throw std::invalid_argument("no acceptance criterion " + std::to_string(id));
}

}  // namespace swarm::acceptance
