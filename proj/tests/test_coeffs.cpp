#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "swarm/coeffs.hpp"

using namespace swarm;

namespace {
ModelParams base(double diff = 0.2) {
  ModelParams p;
  p.a = 1.0;
  p.sigma = 1.0;
  p.diff = diff;
  p.tau = 1.0;
  p.dim = 2;
  return p;
}
}  // namespace

TEST(Coeffs, CriticalTemperature) {
  const auto c = derive(base());
  EXPECT_EQ(c.temp_crit, 1.0 / 4.0);
  EXPECT_EQ(c.temp, 1.0 * 0.2);
  auto p = base();
  p.dim = 1;
  EXPECT_EQ(derive(p).temp_crit, 1.0 / 3.0);
}

TEST(Coeffs, DiffusionCoefficientAboveCritical) {
  const auto c = derive(base(0.5));
  ASSERT_TRUE(c.d_diff.has_value());
  EXPECT_NEAR(*c.d_diff, 0.5 * 0.25 / (0.5 - 0.25), 1e-15);
  EXPECT_FALSE(c.comfort_speed.has_value());
  ASSERT_TRUE(c.s_sq.has_value());
  EXPECT_NEAR(*c.s_sq, 4.0 * (0.5 - 0.25), 1e-15);
  auto p = base(0.5);
  p.dim = 1;
  EXPECT_NEAR(*derive(p).d_diff, 1.0, 1e-14);
}

TEST(Coeffs, OrderedRegimeFields) {
  const auto c = derive(base(0.2));
  ASSERT_TRUE(c.comfort_speed.has_value());
  EXPECT_NEAR(*c.comfort_speed, std::sqrt(0.2), 1e-15);
  EXPECT_FALSE(c.d_diff.has_value());
  EXPECT_FALSE(c.s_sq.has_value());
}

TEST(Coeffs, ZeroEpsCollapsesToEuler) {
  for (int d = 1; d <= 3; ++d)
    for (double diff : {0.05, 0.1, 0.3, 0.9}) {
      auto p = base(diff);
      p.dim = d;
      p.tau = 0.7;
      const auto c = derive(p);
      EXPECT_EQ(c.lambda_eps, 1.0);
      EXPECT_EQ(c.tau_eps, p.tau);
      EXPECT_EQ(c.chi_eps, 1.0 - (d + 2) * (p.temperature() / (p.a * p.a)));
    }
}

TEST(Coeffs, AlphaZeroSpeedsMatchComfortSpeed) {
  const auto c = derive_with_alpha(base(0.2), 0.0);
  ASSERT_TRUE(c.c1_alpha && c.c2_alpha);
  EXPECT_NEAR(*c.c1_alpha, std::sqrt(0.2), 1e-15);
  EXPECT_NEAR(*c.c2_alpha, std::sqrt(0.2), 1e-15);
  EXPECT_EQ(c.temp_alpha, c.temp);
}

TEST(Coeffs, SecondSpeedRelation) {
  for (double al : {0.01, 0.05, 0.1, 0.15}) {
    const auto c = derive_with_alpha(base(0.2), al);
    EXPECT_EQ(*c.c2_alpha, (1.0 - 1.5 * al) * *c.c1_alpha);
  }
}

TEST(Coeffs, ChiConvergesToComfortSpeed) {
  // relative gap of chi a^2 to c^2 is at most 10 eps lambda for eps lambda <= 0.1
  for (double diff : {0.05, 0.1, 0.15}) {
    auto p = base(diff);
    const auto c0 = derive(p);
    for (double eps : {1e-3, 1e-2, 0.05}) {
      p.eps = eps;
      const auto c = derive(p);
      if (c.alpha > 0.1) continue;
      const double gap = std::abs(c.relaxation_target_sq() - *c0.comfort_speed * *c0.comfort_speed) /
                         (*c0.comfort_speed * *c0.comfort_speed);
      EXPECT_LE(gap, 10.0 * c.alpha) << diff << " " << eps;
    }
  }
}

TEST(Coeffs, AlphaConstructorsAgree) {
  auto p = base(0.2);
  const auto ca = derive_with_alpha(p, 0.1);
  p.eps = ca.eps;
  const auto ce = derive(p);
  EXPECT_NEAR(ce.alpha, 0.1, 1e-15);
  EXPECT_NEAR(ce.chi_eps, ca.chi_eps, 1e-14);
  EXPECT_NEAR(*ca.kappa_alpha * p.tau, ca.eps, 1e-15);
}

TEST(Coeffs, CriticalTemperatureAlphaRange) {
  for (int d = 1; d <= 3; ++d) {
    const double tc0 = 1.0 / (d + 2);
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double al = max_alpha(d) * i / 100.0;
      const double tc = critical_temperature_alpha(1.0, d, al);
      EXPECT_GE(tc, tc0 * (1 - 1e-15));
      EXPECT_LE(tc, 1.5 * tc0 * (1 + 1e-15));
      if (i > 0) {
        EXPECT_GT(tc, prev);
      }
      prev = tc;
    }
    EXPECT_NEAR(critical_temperature_alpha(1.0, d, max_alpha(d)), 1.5 * tc0, 1e-15);
  }
}

TEST(Coeffs, FirstSpeedIncreasing) {
  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back(0.2 * i / 49.0);
  EXPECT_TRUE(c1_increasing_check(base(0.2), grid));
  EXPECT_TRUE(c1_increasing_check(base(0.2), {0.05}));
  std::vector<double> values;
  EXPECT_TRUE(c1_increasing_check(base(0.2), {0.0, 0.1}, &values));
  ASSERT_EQ(values.size(), 2u);
  EXPECT_GT(values[1], values[0]);
  EXPECT_NEAR(values[0], std::sqrt(0.2), 1e-15);
}

TEST(Coeffs, FirstSpeedMatchesChi) {
  for (double al : {0.02, 0.1, 0.18}) {
    const auto c = derive_with_alpha(base(0.2), al);
    EXPECT_NEAR(c1_squared_alpha(1.0, 2, 0.2, al), c.relaxation_target_sq(), 1e-13);
  }
}

TEST(Coeffs, RegimeViolationNamesCondition) {
  try {
    c1_increasing_check(base(0.4), {0.0, 0.1});
    FAIL();
  } catch (const RegimeError& e) {
    EXPECT_NE(std::string(e.what()).find("temperature"), std::string::npos);
  }
  try {
    c1_increasing_check(base(0.2), {0.0, 0.3});
    FAIL();
  } catch (const RegimeError& e) {
    EXPECT_NE(std::string(e.what()).find("alpha range"), std::string::npos);
  }
}

TEST(Coeffs, Rejections) {
  auto p = base();
  p.dim = 4;
  EXPECT_THROW(derive(p), std::invalid_argument);
  EXPECT_THROW(derive_with_alpha(base(), 0.25), RegimeError);
  EXPECT_THROW(derive_with_alpha(base(), 0.2), RegimeError);  // xi = 0
  EXPECT_THROW(derive_with_alpha(base(), -0.01), RegimeError);
  p = base();
  p.sigma = -1;
  EXPECT_THROW(derive(p), std::invalid_argument);
}

TEST(Coeffs, KernelMoments) {
  EXPECT_NEAR(kernel_moment(2), std::numbers::pi / 8.0, 1e-15);
  EXPECT_NEAR(kernel_moment(3), 2.0 * std::numbers::pi / 15.0, 1e-15);
  EXPECT_NEAR(kernel_moment(1), 1.0 / 3.0, 1e-15);
  // midpoint-rule cross-check of (1/2) int_{-1}^{1} x^2 dx
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + (i + 0.5) * 2.0 / n;
    s += 0.5 * x * x * 2.0 / n;
  }
  EXPECT_NEAR(kernel_moment(1), s, 1e-9);
  for (int d = 1; d <= 3; ++d) EXPECT_NEAR(normalized_kernel_moment(d), 1.0 / (2.0 * (d + 2)), 1e-15);
  EXPECT_THROW(kernel_moment(0), std::invalid_argument);
}

TEST(Coeffs, UserKernelMoment) {
  auto p = base();
  p.radius = 2.0;
  p.kernel_moment = 0.3;
  EXPECT_NEAR(derive(p).k_r, 1.2, 1e-15);
}

TEST(Coeffs, DimensionlessUnderRescaling) {
  auto p = base(0.1);
  p.tau = 0.8;
  p.eps = 0.05;
  const auto c = derive(p);
  for (double s : {0.5, 3.0}) {
    auto q = p;
    q.a *= s;
    q.tau /= s;
    q.sigma /= s;
    q.diff *= s * s * s;
    const auto cs = derive(q);
    EXPECT_NEAR(cs.lambda, c.lambda, 1e-13);
    EXPECT_NEAR(cs.alpha, c.alpha, 1e-13);
    EXPECT_NEAR(cs.chi_eps, c.chi_eps, 1e-13);
    EXPECT_NEAR(cs.xi_alpha, c.xi_alpha, 1e-13);
  }
}

TEST(Coeffs, EffectiveTemperatureFromPressure) {
  // the pressure evaluated at |u| = c1 has slope T_alpha in rho
  const auto c = derive_with_alpha(base(0.2), 0.1);
  const double c1sq = *c.c1_alpha * *c.c1_alpha;
  EXPECT_NEAR(c.pressure(1.0, c1sq), c.temp_alpha, 1e-15);
  EXPECT_NEAR(c.temp_alpha, 0.2 - 0.01 * (3.0 - 8 * 0.2) / (2 * 0.5), 1e-14);
  EXPECT_NEAR(c.temp_alpha_printed, ((1.0 - 0.1) * 0.2 - 0.15) / 0.5, 1e-14);
}

TEST(Coeffs, InfiniteTau) {
  auto p = base(0.25);
  p.tau = std::numeric_limits<double>::infinity();
  const auto c = derive(p);
  EXPECT_EQ(c.lambda, 0.0);
  EXPECT_EQ(c.relaxation_rate(), 0.0);
}

TEST(Coeffs, TableMarksAbsentFields) {
  const auto rows = coefficient_table(derive(base(0.5)));
  bool saw = false;
  for (const auto& r : rows)
    if (r.name == "comfort_speed") {
      saw = true;
      EXPECT_FALSE(r.valid);
    }
  EXPECT_TRUE(saw);
}
