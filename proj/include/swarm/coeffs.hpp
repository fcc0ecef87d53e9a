#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace swarm {

// Physical parameters of the swarm model. Times and speeds are in the
// units of the hydrodynamic scaling; eps is the scale separation.
struct ModelParams {
  double a = 1.0;       // comfort speed
  double tau = 1.0;     // self-propulsion relaxation time (may be +inf)
  double sigma = 1.0;   // social relaxation time
  double diff = 0.2;    // velocity diffusion D
  double radius = 1.0;  // interaction range R
  double eps = 0.0;     // scale separation
  int dim = 2;          // velocity-space dimension

  // Unit-mass second moment of a user-supplied isotropic kernel. When absent
  // the unit-ball indicator is used.
  std::optional<double> kernel_moment;

  double temperature() const { return sigma * diff; }

  void validate() const {
    auto positive = [](double x) { return x > 0.0 && !std::isnan(x); };
    if (dim < 1 || dim > 3) throw std::invalid_argument("dim must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
    if (!positive(a) || !std::isfinite(a)) throw std::invalid_argument("comfort speed a must be positive and finite");
    if (!positive(tau)) throw std::invalid_argument("tau must be positive");
    if (!positive(sigma) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive and finite");
    if (!(diff >= 0.0) || !std::isfinite(diff)) throw std::invalid_argument("diff must be non-negative and finite");
    if (!positive(radius) || !std::isfinite(radius)) throw std::invalid_argument("radius must be positive and finite");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be non-negative and finite");
    if (kernel_moment && !positive(*kernel_moment)) throw std::invalid_argument("kernel moment must be positive");
  }
};

class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline double unit_sphere_area(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
  }
  throw std::invalid_argument("unsupported dimension " + std::to_string(dim));
}

inline double unit_ball_volume(int dim) { return unit_sphere_area(dim) / dim; }

// (1/2) * integral of xi_1^2 over the unit ball: |S^{d-1}| / (2 d (d+2)).
inline double kernel_moment(int dim) {
  return unit_sphere_area(dim) / (2.0 * dim * (dim + 2));
}

// Same moment for the indicator normalised to unit mass: 1 / (2 (d+2)).
// This is the constant that enters the ratio expansion of the nonlocal mean.
inline double normalized_kernel_moment(int dim) { return kernel_moment(dim) / unit_ball_volume(dim); }

inline double max_alpha(int dim) { return 2.0 / (dim + 8); }

// Critical temperature of the alpha-parametrised model; valid on the closed
// range [0, 2/(d+8)].
inline double critical_temperature_alpha(double a, int dim, double alpha) {
  const double tc0 = a * a / (dim + 2);
  return tc0 * (1.0 - 0.5 * (dim + 2) * alpha) / (1.0 - 0.5 * (dim + 4) * alpha);
}

// a^2 chi at alpha, written through T_c(alpha); +inf at the closed end of the
// alpha range where xi_alpha vanishes.
inline double c1_squared_alpha(double a, int dim, double temp, double alpha) {
  const double xi = 1.0 - 0.5 * (dim + 8) * alpha;
  const double tc = critical_temperature_alpha(a, dim, alpha);
  if (xi <= 0.0) return tc > temp ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  return (dim + 2) * (1.0 - 0.5 * (dim + 4) * alpha) / xi * (tc - temp);
}

struct DerivedCoefficients {
  ModelParams params;

  double temp = 0.0;
  double temp_crit = 0.0;
  std::optional<double> comfort_speed;
  std::optional<double> s_sq;
  std::optional<double> d_diff;

  double lambda = 0.0;
  double lambda_eps = 1.0;
  double mu = 0.0;
  double kernel_moment = 0.0;            // unit-ball indicator, unnormalised
  double kernel_moment_unit_mass = 0.0;  // moment actually used in k_r
  double k_r = 0.0;
  double pi_coeff = 0.0;  // pi(rho,|u|) = pi_coeff * rho * ((d+2)T - a^2 + |u|^2)
  double chi_eps = 0.0;
  double tau_eps = 0.0;

  double alpha = 0.0;
  double eps = 0.0;
  double xi_alpha = 1.0;
  std::optional<double> kappa_alpha;
  double temp_crit_alpha = 0.0;
  std::optional<double> c1_alpha;
  std::optional<double> c2_alpha;
  std::optional<double> delta_alpha;
  double temp_alpha = 0.0;          // effective SOH temperature from the NS pressure
  double temp_alpha_printed = 0.0;  // closed form as printed in the literature
  double nu = 0.0;

  int dim() const { return params.dim; }
  bool ordered() const { return temp < temp_crit; }

  // Effective isothermal-plus-correction pressure T rho - eps pi(rho, |u|).
  double pressure(double rho, double speed_sq) const {
    const double a2 = params.a * params.a;
    return temp * rho - 0.5 * alpha * rho * ((dim() + 2) * temp - a2 + speed_sq);
  }

  // Target speed squared of the relaxation source (c^2 at eps = 0).
  double relaxation_target_sq() const { return chi_eps * params.a * params.a; }

  // Rate k in d|u|^2/dt = 2 k |u|^2 (C - |u|^2).
  double relaxation_rate() const { return 1.0 / (tau_eps * params.a * params.a); }
};

namespace detail {

inline DerivedCoefficients derive_impl(const ModelParams& p, double alpha, double eps) {
  const int d = p.dim;
  if (!(alpha >= 0.0) || alpha > max_alpha(d))
    throw RegimeError("alpha = " + std::to_string(alpha) + " outside [0, 2/(d+8)] = [0, " +
                      std::to_string(max_alpha(d)) + "]");
  const double xi = 1.0 - 0.5 * (d + 8) * alpha;
  if (!(xi > 0.0))
    throw RegimeError("alpha = " + std::to_string(alpha) + " gives xi_alpha = 0 (relaxation time tau^eps unbounded)");

  DerivedCoefficients c;
  c.params = p;
  const double a2 = p.a * p.a;
  const double t = p.sigma * p.diff;
  c.temp = t;
  c.temp_crit = a2 / (d + 2);
  const double chi0 = 1.0 - (d + 2) * (t / a2);
  if (t < c.temp_crit) c.comfort_speed = std::sqrt(a2 * chi0);
  if (t > c.temp_crit) {
    c.s_sq = (d + 2) * (t - c.temp_crit);
    c.d_diff = t * c.temp_crit / (t - c.temp_crit);
  }

  c.lambda = 2.0 * p.sigma * t / (p.tau * a2);
  c.alpha = alpha;
  c.eps = eps;
  c.lambda_eps = 1.0 - alpha;
  c.mu = p.sigma * t;
  c.kernel_moment = kernel_moment(d);
  c.kernel_moment_unit_mass = p.kernel_moment ? *p.kernel_moment : normalized_kernel_moment(d);
  c.k_r = c.kernel_moment_unit_mass * p.radius * p.radius;
  c.pi_coeff = 0.5 * c.lambda;

  if (alpha == 0.0) {
    c.chi_eps = chi0;
    c.tau_eps = p.tau;
  } else {
    const double half = 0.5 * alpha;
    c.chi_eps = (1.0 - half * (d + 2) - (d + 2) * (t / a2) * (1.0 - half * (d + 4))) / xi;
    c.tau_eps = p.tau / xi;
  }
  c.xi_alpha = xi;
  if (t > 0.0) c.kappa_alpha = alpha * a2 / (2.0 * p.sigma * t);
  c.temp_crit_alpha = critical_temperature_alpha(p.a, d, alpha);

  if (c.chi_eps > 0.0) {
    c.c1_alpha = std::sqrt(a2 * c.chi_eps);
    c.c2_alpha = (1.0 - 1.5 * alpha) * *c.c1_alpha;
  }
  c.temp_alpha = t - 0.5 * alpha * ((d + 2) * t - a2 + a2 * c.chi_eps);
  c.temp_alpha_printed = ((1.0 + 0.5 * (d - 4) * alpha) * t - 1.5 * alpha * a2) / xi;
  if (c.c1_alpha) c.delta_alpha = c.temp_alpha / *c.c1_alpha;
  c.nu = (d + 2.0) / (d + 8.0) * (1.0 - (d + 4) * t / a2);
  return c;
}

}  // namespace detail

// Coefficients with alpha = eps * lambda taken from the parameters (Euler/NS use).
inline DerivedCoefficients derive(const ModelParams& p) {
  p.validate();
  const double t = p.temperature();
  const double lambda = 2.0 * p.sigma * t / (p.tau * p.a * p.a);
  return detail::derive_impl(p, p.eps * lambda, p.eps);
}

// Coefficients with alpha as the free input and eps = kappa_alpha * tau
// (fast-relaxation limit use). The eps field of the params is overwritten.
inline DerivedCoefficients derive_with_alpha(ModelParams p, double alpha) {
  p.validate();
  const double t = p.temperature();
  if (alpha > 0.0 && !(t > 0.0)) throw RegimeError("alpha > 0 requires T > 0");
  if (alpha > 0.0 && !std::isfinite(p.tau)) throw RegimeError("alpha > 0 requires finite tau");
  const double lambda = 2.0 * p.sigma * t / (p.tau * p.a * p.a);
  p.eps = alpha > 0.0 ? alpha / lambda : 0.0;
  return detail::derive_impl(p, alpha, p.eps);
}

// One row of the printable coefficient table.
struct CoefficientRow {
  std::string name;
  double value;
  bool valid;
};

inline std::vector<CoefficientRow> coefficient_table(const DerivedCoefficients& c) {
  auto opt = [](const char* n, const std::optional<double>& v) {
    return CoefficientRow{n, v.value_or(std::numeric_limits<double>::quiet_NaN()), v.has_value()};
  };
  return {
      {"temp", c.temp, true},
      {"temp_crit", c.temp_crit, true},
      opt("comfort_speed", c.comfort_speed),
      opt("s_sq", c.s_sq),
      opt("d_diff", c.d_diff),
      {"lambda", c.lambda, true},
      {"lambda_eps", c.lambda_eps, true},
      {"mu", c.mu, true},
      {"kernel_moment", c.kernel_moment, true},
      {"kernel_moment_unit_mass", c.kernel_moment_unit_mass, true},
      {"k_r", c.k_r, true},
      {"pi_coeff", c.pi_coeff, true},
      {"chi_eps", c.chi_eps, true},
      {"tau_eps", c.tau_eps, true},
      {"alpha", c.alpha, true},
      {"eps", c.eps, true},
      {"xi_alpha", c.xi_alpha, true},
      opt("kappa_alpha", c.kappa_alpha),
      {"temp_crit_alpha", c.temp_crit_alpha, true},
      opt("c1_alpha", c.c1_alpha),
      opt("c2_alpha", c.c2_alpha),
      opt("delta_alpha", c.delta_alpha),
      {"temp_alpha", c.temp_alpha, true},
      {"temp_alpha_printed", c.temp_alpha_printed, true},
      {"nu", c.nu, true},
  };
}

// True iff c1(alpha) is strictly increasing over the given grid. Throws when
// an alpha is out of range or T >= T_c(alpha) at some grid point; the message
// names which condition failed.
inline bool c1_increasing_check(const ModelParams& p, const std::vector<double>& alphas,
                                std::vector<double>* c1_values = nullptr) {
  p.validate();
  std::vector<double> values;
  values.reserve(alphas.size());
  for (double al : alphas) {
    if (!(al >= 0.0) || al > max_alpha(p.dim))
      throw RegimeError("alpha range violated: alpha = " + std::to_string(al));
    const double tc = critical_temperature_alpha(p.a, p.dim, al);
    if (p.temperature() >= tc)
      throw RegimeError("temperature regime violated: T = " + std::to_string(p.temperature()) +
                        " >= T_c(alpha = " + std::to_string(al) + ") = " + std::to_string(tc));
    values.push_back(std::sqrt(c1_squared_alpha(p.a, p.dim, p.temperature(), al)));
  }
  if (c1_values) *c1_values = values;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) return false;
  return true;
}

}  // namespace swarm
