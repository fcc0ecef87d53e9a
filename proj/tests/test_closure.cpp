#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swarm/closure.hpp"

using namespace swarm;

TEST(Quadrature, SecondAndFourthMoments) {
  auto norm2 = [](std::span<const double> w) { return w[0] * w[0] + w[1] * w[1]; };
  EXPECT_NEAR(gaussian_moment(norm2, 0.3, 2, 8), 0.6, 1e-14);
  auto norm4 = [&](std::span<const double> w) { return norm2(w) * norm2(w); };
  EXPECT_NEAR(gaussian_moment(norm4, 0.3, 2, 8), 0.72, 1e-14);

  // Monte-Carlo oracle for the fourth moment
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01(0.0, std::sqrt(0.3));
  const int n = 400000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w[2] = {n01(rng), n01(rng)};
    const double v = norm4(w);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, 0.72, 4.0 * se);
}

TEST(Quadrature, OddMomentVanishes) {
  const auto m = gaussian_moment_vector(
      [](std::span<const double> w, std::span<double> out) {
        for (std::size_t k = 0; k < w.size(); ++k) out[k] = w[k];
      },
      3, 0.7, 3, 6);
  for (double x : m) EXPECT_NEAR(x, 0.0, 1e-15);
  EXPECT_THROW(gaussian_moment([](std::span<const double>) { return 1.0; }, 1.0, 1, 3), std::invalid_argument);
}

TEST(Quadrature, ExactDegree) {
  // E[w^(2k)] = T^k (2k-1)!! in 1-D, exact up to degree 2n-1
  const double t = 0.4;
  for (int k = 1; k <= 5; ++k) {
    double dfact = 1.0;
    for (int j = 2 * k - 1; j > 0; j -= 2) dfact *= j;
    const double v = gaussian_moment([k](std::span<const double> w) { return std::pow(w[0], 2 * k); }, t, 1, 6);
    EXPECT_NEAR(v, std::pow(t, k) * dfact, 1e-13 * std::pow(t, k) * dfact);
  }
}

TEST(Polynomial, Calculus) {
  auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  auto p = x * x * y + 3.0 * y;
  const double w[2] = {2.0, -1.0};
  EXPECT_DOUBLE_EQ(p(w), -4.0 - 3.0);
  EXPECT_DOUBLE_EQ(p.derivative(0)(w), 2 * 2.0 * -1.0);
  EXPECT_DOUBLE_EQ(p.laplacian()(w), 2 * -1.0);
  EXPECT_EQ(p.degree(), 3);
}

class ClosureDims : public ::testing::TestWithParam<int> {};

TEST_P(ClosureDims, Solvability) {
  const int d = GetParam();
  for (double t : {0.25, 0.8}) {
    const auto set = make_closure_functions(t, 1.3, d);
    const auto rep = check_solvability(set, 8);
    EXPECT_EQ(rep.rows.size(), 5u);
    EXPECT_TRUE(rep.passed()) << rep.max_residual();
  }
}

TEST_P(ClosureDims, PseudoInverse) {
  const int d = GetParam();
  const double t = 0.25;
  const auto set = make_closure_functions(t, 1.0, d);
  VelocityGrid grid{6.0 * std::sqrt(t), d == 3 ? 24 : 64, d};
  if (grid.spacing() > std::sqrt(t) / 8.0) grid.n = static_cast<int>(std::ceil(16.0 * 6.0)) + 1;
  const auto rep = check_pseudo_inverse(set, grid);
  for (const auto& r : rep.rows) EXPECT_LE(r.residual, 1e-12) << r.name;
}

INSTANTIATE_TEST_SUITE_P(All, ClosureDims, ::testing::Values(1, 2, 3));

TEST(Closure, WrongScaleDetected) {
  const double t = 0.25;
  const auto set = make_closure_functions(t, 1.0, 2);
  VelocityGrid grid{3.0, 64, 2};
  const auto wrong = set.h[0] * -1.0;  // Phi = -sigma h instead of -sigma h / 2
  const double r = pseudo_inverse_residual(wrong, set.h[0], t, set.diffusion(), grid);
  EXPECT_NEAR(r, 1.0, 1e-12);  // residual equals |phi M|, twice the half-scale image
  const double half = pseudo_inverse_residual(set.h[0] * -0.75, set.h[0], t, set.diffusion(), grid);
  EXPECT_NEAR(half, 0.5, 1e-12);
}

TEST(Closure, ResidualInvariantUnderJointRescaling) {
  // (T, sigma) -> (s^2 T, sigma/s) with the velocity grid scaled by s
  const auto a = make_closure_functions(0.25, 1.0, 2);
  const auto b = make_closure_functions(0.25 * 4.0, 0.5, 2);
  VelocityGrid ga{3.0, 128, 2}, gb{6.0, 128, 2};
  const auto ra = check_pseudo_inverse(a, ga), rb = check_pseudo_inverse(b, gb);
  for (std::size_t i = 0; i < ra.rows.size(); ++i) {
    EXPECT_LE(ra.rows[i].residual, 1e-12);
    EXPECT_LE(rb.rows[i].residual, 1e-12);
  }
}

TEST(Closure, UnresolvedGridRejected) {
  const auto set = make_closure_functions(0.25, 1.0, 2);
  EXPECT_THROW(check_pseudo_inverse(set, VelocityGrid{3.0, 16, 2}), std::invalid_argument);
}

namespace {
ModelParams flow_params(int d) {
  ModelParams p;
  p.a = 1.1;
  p.sigma = 1.3;
  p.diff = 0.25 / 1.3;
  p.tau = 0.7;
  p.dim = d;
  return p;
}
}  // namespace

TEST(Closure, MomentsAtRest) {
  for (int d : {2, 3}) {
    const auto p = flow_params(d);
    LocalFlow flow{1.7, std::vector<double>(d, 0.0), std::vector<double>(d * d, 0.0), std::vector<double>(d, 0.0)};
    const auto cmp = compare_first_order_moments(p, flow, 12);
    const double t = p.temperature();
    for (double x : cmp.b1_quadrature) EXPECT_NEAR(x, 0.0, 1e-14);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double expect =
            i == j ? -flow.rho * (p.sigma * t / p.tau) * ((d + 2) * t / (p.a * p.a) - 1.0) : 0.0;
        EXPECT_NEAR(cmp.u_quadrature[i * d + j], expect, 1e-10 * std::abs(expect) + 1e-15);
      }
  }
}

TEST(Closure, MomentsRandomFlows) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int d : {2, 3}) {
    const auto p = flow_params(d);
    for (int trial = 0; trial < 20; ++trial) {
      LocalFlow flow;
      flow.rho = 0.5 + std::abs(n01(rng));
      for (int i = 0; i < d; ++i) {
        flow.u.push_back(0.5 * n01(rng));
        flow.grad_rho.push_back(n01(rng));
      }
      for (int i = 0; i < d * d; ++i) flow.grad_u.push_back(n01(rng));
      const auto rep = check_b1_b3(p, flow, 12);
      EXPECT_TRUE(rep.passed()) << rep.rows[0].residual << " " << rep.rows[1].residual;
    }
  }
}

TEST(Closure, SymmetricGradientTerm) {
  const int d = 2;
  const auto p = flow_params(d);
  LocalFlow flow{1.0, {0.0, 0.0}, {0.3, 0.2, 0.2, -0.1}, {0.0, 0.0}};
  auto rest = flow;
  rest.grad_u.assign(4, 0.0);
  const auto cmp = compare_first_order_moments(p, flow, 12);
  const auto base = compare_first_order_moments(p, rest, 12);
  const double mu = p.sigma * p.temperature();
  for (int k = 0; k < 4; ++k)
    EXPECT_NEAR(cmp.u_quadrature[k] - base.u_quadrature[k], -mu * flow.rho * flow.grad_u[k], 1e-13);
}

TEST(Closure, MomentQuadratureIsExactFromFourPoints) {
  const auto p = flow_params(2);
  LocalFlow flow{1.2, {0.3, -0.4}, {0.1, 0.5, -0.2, 0.3}, {0.0, 0.0}};
  EXPECT_GT(compare_first_order_moments(p, flow, 2).b1_error, 1e-6);
  for (int n = 4; n <= 14; n += 2) EXPECT_LT(compare_first_order_moments(p, flow, n).b1_error, 1e-12) << n;
}

TEST(KernelExpansion, ConstantFields) {
  const auto rho = PeriodicField::trig(1.0, 0.0, 1), j = PeriodicField::trig(0.4, 0.0, 1);
  const auto res = kernel_expansion_study(1.0 / 6.0, rho, j, 0.1, 2);
  for (double r : res.remainder) EXPECT_LT(r, 1e-15);
}

TEST(KernelExpansion, FourthOrderWithUnitMassMoment) {
  const auto rho = PeriodicField::trig(1.0, 0.1, 1), j = PeriodicField::trig(0.5, 0.2, 2, 0.3);
  const auto res = kernel_expansion_study(normalized_kernel_moment(1), rho, j, 0.1, 3);
  EXPECT_GE(res.min_order(), 3.5);
  EXPECT_TRUE(check_kernel_expansion(normalized_kernel_moment(1), rho, j, 0.1).passed());
}

TEST(KernelExpansion, FirstCorrectionMatchesNumerics) {
  const auto rho = PeriodicField::trig(1.0, 0.1, 1), j = PeriodicField::trig(0.7, 0.0, 1);
  // (vbar - u)/eps^2 - u1 = O(eps^2)
  const auto coarse = kernel_expansion_study(normalized_kernel_moment(1), rho, j, 0.05, 1);
  EXPECT_LT(coarse.remainder[1] / (0.025 * 0.025), 0.02);
  EXPECT_GT(coarse.order[0], 3.5);
}

TEST(KernelExpansion, UnnormalisedMomentOnlySecondOrder) {
  const auto rho = PeriodicField::trig(1.0, 0.1, 1), j = PeriodicField::trig(0.5, 0.2, 2, 0.3);
  const auto res = kernel_expansion_study(kernel_moment(1), rho, j, 0.1, 3);
  EXPECT_LT(res.min_order(), 2.5);
}

TEST(CollisionInvariants, PolynomialTimesMaxwellian) {
  ModelParams p;
  p.sigma = 0.8;
  p.diff = 0.4;
  p.dim = 2;
  const auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const std::vector<Polynomial> tests = {Polynomial::constant(2, 1.0) + 0.3 * x,
                                         Polynomial::constant(2, 2.0) + x * y - 0.2 * y * y * y + 0.1 * x * x * x * x,
                                         Polynomial::constant(2, 1.0) + 0.5 * x * x - 0.4 * y};
  for (const auto& phi : tests) {
    const auto rep = check_collision_invariants(phi, {0.3, -0.2}, p);
    EXPECT_TRUE(rep.passed()) << rep.max_residual();
  }
  // a non-invariant moment does not vanish
  const auto q = collision_factor(tests[1], {0.3, -0.2}, p);
  const double second = gaussian_moment([&](std::span<const double> w) { return q(w) * w[0] * w[0]; },
                                        p.temperature(), 2, 10);
  EXPECT_GT(std::abs(second), 1e-3);
}

TEST(CollisionInvariants, ThreeDimensional) {
  ModelParams p;
  p.sigma = 1.1;
  p.diff = 0.3;
  p.dim = 3;
  const auto z = Polynomial::variable(3, 2), x = Polynomial::variable(3, 0);
  const auto phi = Polynomial::constant(3, 1.0) + 0.2 * z * x + 0.1 * z * z * z;
  EXPECT_TRUE(check_collision_invariants(phi, {0.1, 0.2, -0.3}, p).passed());
}
