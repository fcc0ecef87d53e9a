#include <gtest/gtest.h>

#include <cmath>

#include "swarm/kinetic.hpp"

using namespace swarm;

namespace {
ModelParams kin_params(double diff = 0.25) {
  ModelParams p;
  p.a = 1.0;
  p.sigma = 1.0;
  p.diff = diff;
  p.tau = 1.0;
  p.dim = 2;
  return p;
}

double linf(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

DistributionFunction bimaxwellian(const VelocityGrid& g, double t) {
  auto f = sample_maxwellian(g, 0.7, {0.6, -0.2, 0.0}, t);
  const auto f2 = sample_maxwellian(g, 0.3, {-0.8, 0.4, 0.0}, 0.6 * t);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += f2.values[i];
  return f;
}
}  // namespace

TEST(Kinetic, MassOfCollisionOperatorVanishes) {
  const auto p = kin_params();
  VelocityGrid g{4.0, 48, 2};
  const auto f = bimaxwellian(g, 0.25);
  const auto q = apply_q(f, p);
  EXPECT_LT(std::abs(q.mass()), 1e-14);
  VelocityGrid g1{4.0, 80, 1};
  EXPECT_LT(std::abs(apply_q(bimaxwellian(g1, 0.25), p).mass()), 1e-14);
}

TEST(Kinetic, NullSpaceResidualSecondOrder) {
  const auto p = kin_params();
  for (const auto& u : {std::array<double, 3>{0.0, 0.0, 0.0}, std::array<double, 3>{0.4, -0.3, 0.0}}) {
    std::vector<double> res;
    for (int n : {32, 64, 128}) {
      VelocityGrid g{4.0, n, 2};
      const auto f = sample_maxwellian(g, 1.3, u, p.temperature());
      res.push_back(linf(apply_q(f, p).values) / linf(f.values));
    }
    EXPECT_NEAR(std::log2(res[0] / res[1]), 2.0, 0.15);
    EXPECT_NEAR(std::log2(res[1] / res[2]), 2.0, 0.15);
  }
}

TEST(Kinetic, MomentumOfCollisionOperatorVanishes) {
  const auto p = kin_params();
  for (int n : {32, 64, 128}) {
    VelocityGrid g{4.0, n, 2};
    const auto f = bimaxwellian(g, 0.25);
    const auto m = apply_q(f, p).momentum();
    EXPECT_LT(std::hypot(m[0], m[1]), 1e-10) << n;
  }
}

TEST(Kinetic, ZeroMassRejected) {
  VelocityGrid g{4.0, 16, 1};
  DistributionFunction f(g);
  EXPECT_THROW(apply_q(f, kin_params()), std::domain_error);
}

TEST(Kinetic, EquilibriumIsStationary) {
  const auto p = kin_params();
  std::vector<double> err;
  for (int n : {32, 64}) {
    VelocityGrid g{3.0, n, 2};
    const auto f0 = sample_maxwellian(g, 1.0, {0.3, 0.1, 0.0}, p.temperature());
    const double h = g.spacing();
    const double dt = 0.9 * std::min(h * h / (4.0 * p.diff), p.sigma * h / (2.0 * g.v_max));
    const auto f = relax(f0, p, 1.0, dt);
    std::vector<double> diff(f.values.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = f.values[i] - f0.values[i];
    err.push_back(linf(diff) / linf(f0.values));
  }
  EXPECT_LT(err[0], 0.02);
  EXPECT_GT(err[0] / err[1], 3.0);
}

TEST(Kinetic, TwoMaxwelliansRelaxToOne) {
  const auto p = kin_params();
  std::vector<double> err;
  for (int n : {24, 48}) {
    VelocityGrid g{4.0, n, 2};
    const auto f0 = bimaxwellian(g, 0.25);
    const double m0 = f0.mass();
    const auto mom = f0.momentum();
    const auto f = relax(f0, p, 8.0, 0.02, {RelaxMode::semi_implicit, {}});
    EXPECT_NEAR(f.mass(), m0, 1e-12 * m0);
    const auto target = sample_maxwellian(g, m0, {mom[0] / m0, mom[1] / m0, 0.0}, p.temperature());
    double l1 = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) l1 += std::abs(f.values[i] - target.values[i]);
    err.push_back(l1 * g.cell_volume() / m0);
  }
  EXPECT_LT(err[1], 0.02);
  EXPECT_LT(err[1], err[0]);
}

TEST(Kinetic, FreeEnergyNonincreasing) {
  const auto p = kin_params();
  VelocityGrid g{4.0, 64, 2};
  const auto f0 = bimaxwellian(g, 0.25);
  const double h = g.spacing();
  const double dt = 0.9 * std::min(h * h / (4.0 * p.diff), p.sigma * h / (2.0 * g.v_max));
  double prev = free_energy(f0, p.temperature());
  double worst = -1.0;
  RelaxOptions opt;
  opt.observer = [&](double, const DistributionFunction& f) {
    const double e = free_energy(f, p.temperature());
    worst = std::max(worst, e - prev);
    prev = e;
  };
  relax(f0, p, 2.0, dt, opt);
  EXPECT_LE(worst, 1e-8);
  EXPECT_LT(prev, free_energy(f0, p.temperature()));
}

TEST(Kinetic, ExplicitStabilityGuard) {
  VelocityGrid g{4.0, 64, 2};
  const auto f0 = sample_maxwellian(g, 1.0, {0.0, 0.0, 0.0}, 0.25);
  EXPECT_THROW(relax(f0, kin_params(), 1.0, 0.1), StabilityError);
  EXPECT_NO_THROW(relax(f0, kin_params(), 0.1, 0.1, {RelaxMode::semi_implicit, {}}));
}

TEST(Kinetic, InfiniteTauMatchesRelax) {
  auto p = kin_params();
  p.tau = std::numeric_limits<double>::infinity();
  VelocityGrid g{4.0, 32, 2};
  const auto f0 = bimaxwellian(g, 0.25);
  const auto a = relax(f0, p, 0.5, 0.005);
  const auto b = relax_with_propulsion(f0, p, 1.0, 0.5, 0.005);
  EXPECT_EQ(a.values, b.values);
}

TEST(Kinetic, PropulsionOrderedSpeed) {
  auto p = kin_params(0.2);  // T = 0.2 < T_c = 0.25
  VelocityGrid g{3.2, 64, 2};
  const auto f0 = sample_maxwellian(g, 1.0, {0.3, 0.1, 0.0}, p.temperature());
  const double m0 = f0.mass();
  const auto f = relax_with_propulsion(f0, p, 1e-2, 12.0, 6e-4, {RelaxMode::semi_implicit, {}});
  EXPECT_NEAR(f.mass(), m0, 1e-10 * m0);
  const double c = std::sqrt(1.0 - 4.0 * 0.2);
  EXPECT_NEAR(f.mean_speed(), c, 0.05 * c);
}

TEST(Kinetic, PropulsionDisorderedSpeed) {
  auto p = kin_params(0.5);
  VelocityGrid g{4.5, 48, 2};
  const auto f0 = sample_maxwellian(g, 1.0, {0.3, 0.1, 0.0}, p.temperature());
  const auto f = relax_with_propulsion(f0, p, 1e-2, 10.0, 5e-4, {RelaxMode::semi_implicit, {}});
  EXPECT_LE(f.mean_speed(), 1e-3);
}

TEST(Kinetic, OneDimensionalGrid) {
  auto p = kin_params();
  p.dim = 1;
  VelocityGrid g{3.0, 96, 1};
  const auto f0 = sample_uniform_box(g, 2.0, 1.0);
  const auto f = relax(f0, p, 8.0, 0.01, {RelaxMode::semi_implicit, {}});
  const auto target = sample_maxwellian(g, 2.0, {0.0, 0.0, 0.0}, p.temperature());
  double l1 = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) l1 += std::abs(f.values[i] - target.values[i]);
  EXPECT_LT(l1 * g.cell_volume() / 2.0, 3e-3);
}
