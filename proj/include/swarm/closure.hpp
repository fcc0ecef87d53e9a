#pragma once

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <array>
#include <map>
#include <numbers>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "swarm/coeffs.hpp"
#include "swarm/polynomial.hpp"
#include "swarm/quadrature.hpp"
#include "swarm/velocity_grid.hpp"

namespace swarm {

struct CheckRow {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct CheckReport {
  std::vector<CheckRow> rows;

  void add(std::string name, double residual, double tolerance) {
    rows.push_back({std::move(name), residual, tolerance, residual <= tolerance});
  }
  bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.passed; });
  }
  double max_residual() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.residual);
    return m;
  }
  void append(const CheckReport& o) { rows.insert(rows.end(), o.rows.begin(), o.rows.end()); }
};

// Closure functions of the Chapman-Enskog expansion and their images under
// the pseudo-inverse, all as polynomials in w = v - u. Matrix entries are
// stored row-major.
struct ClosureFunctionSet {
  int dim = 2;
  double temp = 0.25;
  double sigma = 1.0;

  std::vector<Polynomial> h, e;  // dim*dim
  std::vector<Polynomial> g;     // dim
  Polynomial b, c;

  std::vector<Polynomial> big_h, big_e, big_g;
  Polynomial big_b, big_c;

  double diffusion() const { return temp / sigma; }
};

inline ClosureFunctionSet make_closure_functions(double temp, double sigma, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("closure functions need dim 1..3");
  if (!(temp > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("closure functions need T > 0 and sigma > 0");
  ClosureFunctionSet s;
  s.dim = dim;
  s.temp = temp;
  s.sigma = sigma;
  const double d = dim;
  const auto one = Polynomial::constant(dim, 1.0);
  const auto w2 = Polynomial::norm_sq(dim);
  const auto damp = one - w2 * (1.0 / ((d + 2.0) * temp));  // 1 - |w|^2/((d+2)T)

  for (int i = 0; i < dim; ++i) {
    const auto wi = Polynomial::variable(dim, i);
    for (int j = 0; j < dim; ++j) {
      const auto wiwj = wi * Polynomial::variable(dim, j);
      const auto kron = Polynomial::constant(dim, i == j ? 1.0 : 0.0);
      s.h.push_back(kron - wiwj * (1.0 / temp));
      s.e.push_back((i == j ? damp : Polynomial(dim)) - wiwj * (2.0 / ((d + 2.0) * temp)));
    }
    s.g.push_back(damp * wi * (1.0 / std::sqrt(temp)));
  }
  s.b = w2 * (1.0 / temp) * damp;
  s.c = one - w2 * (1.0 / (d * temp));

  for (const auto& p : s.h) s.big_h.push_back(p * (-0.5 * sigma));
  for (const auto& p : s.e) s.big_e.push_back(p * (-0.5 * sigma));
  for (const auto& p : s.g) s.big_g.push_back(p * (-sigma / 3.0));
  s.big_b = (s.c + s.b * (1.0 / d)) * (-sigma * d / 4.0);
  s.big_c = s.c * (-0.5 * sigma);
  return s;
}

// Polynomial part of L_u[Phi M_u] / M_u = -D (Lap Phi - w.grad Phi / T).
inline Polynomial linearized_operator_factor(const Polynomial& phi, double temp, double diffusion) {
  const int dim = phi.dim();
  Polynomial radial(dim);
  for (int k = 0; k < dim; ++k) radial += Polynomial::variable(dim, k) * phi.derivative(k);
  return (phi.laplacian() - radial * (1.0 / temp)) * (-diffusion);
}

struct ClosurePair {
  std::string name;
  Polynomial image;   // Phi
  Polynomial source;  // phi
};

inline std::vector<ClosurePair> closure_pairs(const ClosureFunctionSet& s) {
  std::vector<ClosurePair> out;
  auto idx = [&](int i, int j) { return std::to_string(i) + std::to_string(j); };
  for (int i = 0; i < s.dim; ++i)
    for (int j = 0; j < s.dim; ++j) out.push_back({"h" + idx(i, j), s.big_h[i * s.dim + j], s.h[i * s.dim + j]});
  out.push_back({"b", s.big_b, s.b});
  out.push_back({"c", s.big_c, s.c});
  for (int i = 0; i < s.dim; ++i)
    for (int j = 0; j < s.dim; ++j) out.push_back({"e" + idx(i, j), s.big_e[i * s.dim + j], s.e[i * s.dim + j]});
  for (int i = 0; i < s.dim; ++i) out.push_back({"g" + std::to_string(i), s.big_g[i], s.g[i]});
  return out;
}

// The family letter of a pair name ("h01" -> 'h').
inline char closure_family(const std::string& name) { return name.empty() ? '?' : name[0]; }

// int phi M dw and int phi w M dw for each closure function; the residual of
// a family is the largest absolute value over its components.
inline CheckReport check_solvability(const ClosureFunctionSet& s, int n_q = 8, double tolerance = 1e-12) {
  const auto rule = gauss_hermite(s.dim, n_q, s.temp);
  std::map<char, double> worst{{'h', 0.0}, {'b', 0.0}, {'c', 0.0}, {'e', 0.0}, {'g', 0.0}};
  for (const auto& pair : closure_pairs(s)) {
    double mass = 0.0;
    std::array<double, 3> first{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const auto w = rule.node(k);
      const double val = rule.weights[k] * pair.source(w);
      mass += val;
      for (int j = 0; j < s.dim; ++j) first[j] += val * w[j];
    }
    double r = std::abs(mass);
    for (int j = 0; j < s.dim; ++j) r = std::max(r, std::abs(first[j]));
    auto& slot = worst[closure_family(pair.name)];
    slot = std::max(slot, r);
  }
  CheckReport rep;
  for (char f : {'h', 'b', 'c', 'e', 'g'}) rep.add(std::string("solvability_") + f, worst[f], tolerance);
  return rep;
}

// max over grid points of |L_u[Phi M] + phi M| / max |phi M|, with L_u applied
// in closed form. Grid velocities are taken relative to u.
inline double pseudo_inverse_residual(const Polynomial& image, const Polynomial& source, double temp,
                                      double diffusion, const VelocityGrid& grid) {
  const auto l_image = linearized_operator_factor(image, temp, diffusion);
  double num = 0.0, den = 0.0;
  const double norm = std::pow(2.0 * std::numbers::pi * temp, -0.5 * grid.dim);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const auto v = grid.velocity(idx);
    double w2 = 0.0;
    for (int k = 0; k < grid.dim; ++k) w2 += v[k] * v[k];
    const double m = norm * std::exp(-0.5 * w2 / temp);
    const std::span<const double> w(v.data(), static_cast<std::size_t>(grid.dim));
    const double src = source(w);
    num = std::max(num, std::abs(m * (l_image(w) + src)));
    den = std::max(den, std::abs(m * src));
  }
  return den > 0.0 ? num / den : num;
}

inline CheckReport check_pseudo_inverse(const ClosureFunctionSet& s, const VelocityGrid& grid,
                                        double tolerance = 1e-12) {
  grid.validate();
  if (grid.dim != s.dim) throw std::invalid_argument("velocity grid dimension differs from closure dimension");
  if (grid.spacing() > std::sqrt(s.temp) / 8.0)
    throw std::invalid_argument("velocity grid does not resolve the Maxwellian (need 8 points per sqrt(T))");
  std::map<char, double> worst{{'h', 0.0}, {'b', 0.0}, {'c', 0.0}, {'e', 0.0}, {'g', 0.0}};
  for (const auto& pair : closure_pairs(s)) {
    auto& slot = worst[closure_family(pair.name)];
    slot = std::max(slot, pseudo_inverse_residual(pair.image, pair.source, s.temp, s.diffusion(), grid));
  }
  CheckReport rep;
  for (char f : {'h', 'b', 'c', 'e', 'g'}) rep.add(std::string("pseudo_inverse_") + f, worst[f], tolerance);
  return rep;
}

// Macroscopic state at a point for the first-order correction f_1.
struct LocalFlow {
  double rho = 1.0;
  std::vector<double> u;       // dim
  std::vector<double> grad_u;  // dim*dim, grad_u[i*dim+j] = d_i u_j
  std::vector<double> grad_rho;
};

struct MomentComparison {
  std::vector<double> b1_quadrature, b1_closed;
  std::vector<double> u_quadrature, u_closed;  // dim*dim
  double b1_error = 0.0;
  double u_error = 0.0;
};

namespace detail {
inline double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}
}  // namespace detail

// First-order moments of f_1: the self-propulsion moment B_1 and the
// pressure-tensor correction U, by quadrature and in closed form. The
// density gradient does not enter either moment at this order.
inline MomentComparison compare_first_order_moments(const ModelParams& p, const LocalFlow& flow, int n_q = 12) {
  p.validate();
  const int d = p.dim;
  if (static_cast<int>(flow.u.size()) != d || static_cast<int>(flow.grad_u.size()) != d * d)
    throw std::invalid_argument("local flow has the wrong dimension");
  if (!std::isfinite(p.tau)) throw std::invalid_argument("moment comparison needs finite tau");
  const double t = p.temperature();
  if (!(t > 0.0)) throw std::invalid_argument("moment comparison needs T > 0");
  const double a2 = p.a * p.a, sig = p.sigma, tau = p.tau, rho = flow.rho;
  const auto& u = flow.u;
  const auto& gu = flow.grad_u;
  const auto set = make_closure_functions(t, sig, d);
  const auto rule = gauss_hermite(d, n_q, t);

  MomentComparison out;
  out.b1_quadrature.assign(d, 0.0);
  out.u_quadrature.assign(d * d, 0.0);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const auto w = rule.node(k);
    double hg = 0.0, euu = 0.0, gu_dot = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        hg += set.h[i * d + j](w) * gu[i * d + j];
        euu += set.e[i * d + j](w) * u[i] * u[j];
      }
      gu_dot += set.g[i](w) * u[i];
    }
    const double f1 =
        sig * rho *
        (0.5 * hg + (1.0 / (tau * a2)) * ((d + 2) * t / 4.0 * set.b(w) + 0.5 * d * ((d + 2) * t / 2.0 - a2) * set.c(w) +
                                          0.5 * (d + 2) * euu + std::sqrt(t) * (d + 2) * gu_dot));
    const double wt = rule.weights[k] * f1;
    double v2 = 0.0;
    for (int i = 0; i < d; ++i) v2 += (w[i] + u[i]) * (w[i] + u[i]);
    for (int i = 0; i < d; ++i) {
      out.b1_quadrature[i] += -wt * v2 * (w[i] + u[i]) / (tau * a2);
      for (int j = 0; j < d; ++j) out.u_quadrature[i * d + j] += wt * w[i] * w[j];
    }
  }

  const double lam = 2.0 * sig * t / (tau * a2);
  const double nu = (d + 2.0) / (d + 8.0) * (1.0 - (d + 4) * t / a2);
  double div = 0.0, u2 = 0.0;
  for (int i = 0; i < d; ++i) {
    div += gu[i * d + i];
    u2 += u[i] * u[i];
  }
  out.b1_closed.assign(d, 0.0);
  out.u_closed.assign(d * d, 0.0);
  for (int i = 0; i < d; ++i) {
    double grad_half_u2 = 0.0, conv = 0.0;
    for (int j = 0; j < d; ++j) {
      grad_half_u2 += gu[i * d + j] * u[j];
      conv += u[j] * gu[j * d + i];
    }
    out.b1_closed[i] =
        0.5 * lam * rho * (div * u[i] + grad_half_u2 + conv + (d + 8) / tau * u[i] * (u2 / a2 - nu));
    for (int j = 0; j < d; ++j) {
      out.u_closed[i * d + j] = -0.5 * sig * t * rho * (gu[i * d + j] + gu[j * d + i]) -
                                (i == j ? rho * sig * t / tau * ((d + 2) * t / a2 - 1.0) : 0.0) -
                                sig * t / (tau * a2) * rho * ((i == j ? u2 : 0.0) + 2.0 * u[i] * u[j]);
    }
  }
  out.b1_error = detail::relative_gap(out.b1_quadrature, out.b1_closed);
  out.u_error = detail::relative_gap(out.u_quadrature, out.u_closed);
  return out;
}

inline CheckReport check_b1_b3(const ModelParams& p, const LocalFlow& flow, int n_q = 12, double tolerance = 1e-8) {
  const auto cmp = compare_first_order_moments(p, flow, n_q);
  CheckReport rep;
  rep.add("b1_moment", cmp.b1_error, tolerance);
  rep.add("pressure_tensor_correction", cmp.u_error, tolerance);
  return rep;
}

// Smooth periodic field on [0, 1) with its second derivative.
struct PeriodicField {
  std::function<double(double)> value;
  std::function<double(double)> second_derivative;

  static PeriodicField trig(double mean, double amplitude, int wavenumber, double phase = 0.0) {
    const double k = 2.0 * std::numbers::pi * wavenumber;
    return {[=](double x) { return mean + amplitude * std::sin(k * x + phase); },
            [=](double x) { return -amplitude * k * k * std::sin(k * x + phase); }};
  }
};

struct KernelExpansionResult {
  std::vector<double> eps;
  std::vector<double> remainder;  // sup_x |vbar - u - eps^2 u1|
  std::vector<double> order;      // log2 of successive remainder ratios
  double min_order() const {
    double m = std::numeric_limits<double>::infinity();
    for (double o : order) m = std::min(m, o);
    return m;
  }
};

// Nonlocal mean of a 1-D flux/density pair with the unit-mass indicator of
// half-width eps*radius, computed by Gauss-Legendre quadrature, compared to
// the second-order expansion with moment k.
inline KernelExpansionResult kernel_expansion_study(double k, const PeriodicField& rho, const PeriodicField& flux,
                                                    double eps_start, int halvings = 3, double radius = 1.0,
                                                    int samples = 64, int nodes = 40) {
  if (!(eps_start > 0.0) || halvings < 1) throw std::invalid_argument("kernel expansion needs eps > 0 and halvings >= 1");
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(gsl_integration_fixed_legendre, nodes, -1.0, 1.0, 0.0, 0.0),
      &gsl_integration_fixed_free);
  const double* xq = gsl_integration_fixed_nodes(ws.get());
  const double* wq = gsl_integration_fixed_weights(ws.get());

  KernelExpansionResult res;
  double eps = eps_start;
  for (int h = 0; h <= halvings; ++h, eps *= 0.5) {
    const double half = eps * radius;
    double worst = 0.0;
    for (int m = 0; m < samples; ++m) {
      const double x = (m + 0.5) / samples;
      double num = 0.0, den = 0.0;
      for (int q = 0; q < nodes; ++q) {
        const double y = x + half * xq[q];
        num += wq[q] * flux.value(y);
        den += wq[q] * rho.value(y);
      }
      const double r = rho.value(x), j = flux.value(x);
      const double u1 = k * radius * radius / (r * r) * (r * flux.second_derivative(x) - j * rho.second_derivative(x));
      worst = std::max(worst, std::abs(num / den - j / r - eps * eps * u1));
    }
    res.eps.push_back(eps);
    res.remainder.push_back(worst);
  }
  for (std::size_t i = 1; i < res.remainder.size(); ++i)
    res.order.push_back(std::log2(res.remainder[i - 1] / res.remainder[i]));
  return res;
}

inline CheckReport check_kernel_expansion(double k, const PeriodicField& rho, const PeriodicField& flux,
                                          double eps_start, double min_order = 3.5) {
  const auto res = kernel_expansion_study(k, rho, flux, eps_start);
  CheckReport rep;
  // Reported as a residual: how far the observed order falls short of min_order.
  rep.add("kernel_expansion_order_deficit", std::max(0.0, min_order - res.min_order()), 0.0);
  return rep;
}

// Collision operator applied in closed form to f = phi(w) M_u(v), w = v - u:
// Q(f) = M_u * q(w). Returns the polynomial q.
inline Polynomial collision_factor(const Polynomial& phi, const std::vector<double>& u, const ModelParams& p,
                                   int n_q = 12) {
  const int d = phi.dim();
  const double t = p.temperature();
  const double dcoef = p.diff;
  const auto rule = gauss_hermite(d, n_q, t);
  double mass = 0.0;
  std::vector<double> mom(d, 0.0);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const auto w = rule.node(k);
    const double val = rule.weights[k] * phi(w);
    mass += val;
    for (int i = 0; i < d; ++i) mom[i] += val * (w[i] + u[i]);
  }
  if (mass == 0.0) throw std::invalid_argument("test function has zero mass");
  // shift = u - u_f
  std::vector<double> shift(d);
  for (int i = 0; i < d; ++i) shift[i] = u[i] - mom[i] / mass;

  Polynomial q = phi.laplacian() * dcoef;
  for (int i = 0; i < d; ++i) {
    const auto wi = Polynomial::variable(d, i);
    const auto di = phi.derivative(i);
    q += di * (shift[i] / p.sigma);
    q -= wi * phi * (shift[i] / (p.sigma * t));
    q -= wi * di * (dcoef / t);
  }
  return q;
}

// int Q(f) dv and int Q(f) v dv for f = phi M_u, by exact quadrature.
inline CheckReport check_collision_invariants(const Polynomial& phi, const std::vector<double>& u,
                                              const ModelParams& p, double tolerance = 1e-12) {
  const int d = phi.dim();
  const int n_q = std::max(8, (phi.degree() + 4) / 2 + 2);
  const auto q = collision_factor(phi, u, p, n_q);
  const auto rule = gauss_hermite(d, n_q, p.temperature());
  double mass = 0.0;
  std::vector<double> mom(d, 0.0);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const auto w = rule.node(k);
    const double val = rule.weights[k] * q(w);
    mass += val;
    for (int i = 0; i < d; ++i) mom[i] += val * (w[i] + u[i]);
  }
  double m = 0.0;
  for (double x : mom) m = std::max(m, std::abs(x));
  CheckReport rep;
  rep.add("collision_mass", std::abs(mass), tolerance);
  rep.add("collision_momentum", m, tolerance);
  return rep;
}

}  // namespace swarm
