#pragma once

#include <gsl/gsl_integration.h>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarm {

// Tensor Gauss-Hermite rule for integrals against the centred Gaussian of
// variance T per component: sum_k weights[k] * g(nodes[k]) ~ int g M_0.
struct QuadratureRule {
  int dim = 1;
  int order = 0;              // points per axis (n_q)
  double temp = 1.0;
  std::vector<double> nodes;  // dim entries per node, node-major
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t k) const {
    return {nodes.data() + k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

// One-dimensional rule for the standard normal density.
inline void standard_normal_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("quadrature order must be positive");
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, static_cast<std::size_t>(n), 0.0, 0.5, 0.0, 0.0),
      &gsl_integration_fixed_free);
  if (!ws) throw std::runtime_error("gauss-hermite allocation failed for n = " + std::to_string(n));
  const double* nodes = gsl_integration_fixed_nodes(ws.get());
  const double* weights = gsl_integration_fixed_weights(ws.get());
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  x.assign(nodes, nodes + n);
  w.resize(n);
  for (int i = 0; i < n; ++i) w[i] = weights[i] * norm;
}

inline QuadratureRule gauss_hermite(int dim, int n_q, double temp) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("quadrature dimension must be 1..3");
  if (!(temp > 0.0)) throw std::invalid_argument("quadrature variance must be positive");
  std::vector<double> x, w;
  standard_normal_rule(n_q, x, w);
  QuadratureRule r;
  r.dim = dim;
  r.order = n_q;
  r.temp = temp;
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(n_q);
  r.nodes.resize(total * dim);
  r.weights.resize(total);
  const double scale = std::sqrt(temp);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    double wt = 1.0;
    for (int k = 0; k < dim; ++k) {
      const std::size_t i = rem % n_q;
      rem /= n_q;
      r.nodes[idx * dim + k] = x[i] * scale;
      wt *= w[i];
    }
    r.weights[idx] = wt;
  }
  return r;
}

// int func(w) M_0(w) dw with M_0 the centred Maxwellian of temperature T.
inline double gaussian_moment(const std::function<double(std::span<const double>)>& func, double temp, int dim,
                              int n_q) {
  if (n_q < 4) throw std::invalid_argument("gaussian_moment needs n_q >= 4");
  const auto rule = gauss_hermite(dim, n_q, temp);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) sum += rule.weights[k] * func(rule.node(k));
  return sum;
}

// Vector-valued variant; func writes `components` values into its output span.
inline std::vector<double> gaussian_moment_vector(
    const std::function<void(std::span<const double>, std::span<double>)>& func, std::size_t components,
    double temp, int dim, int n_q) {
  if (n_q < 4) throw std::invalid_argument("gaussian_moment needs n_q >= 4");
  const auto rule = gauss_hermite(dim, n_q, temp);
  std::vector<double> sum(components, 0.0), tmp(components);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    std::fill(tmp.begin(), tmp.end(), 0.0);
    func(rule.node(k), tmp);
    for (std::size_t c = 0; c < components; ++c) sum[c] += rule.weights[k] * tmp[c];
  }
  return sum;
}

}  // namespace swarm
