#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "swarm/hydro.hpp"
#include "swarm/soh.hpp"

using namespace swarm;

namespace {
constexpr double kPi = std::numbers::pi;

SpatialGrid line(int n) {
  SpatialGrid g;
  g.nx = n;
  return g;
}

double bump(double x, double x0, double w) {
  double y = x - x0;
  y -= std::round(y);
  return std::exp(-y * y / (2.0 * w * w));
}

// Quasi-1D characteristic matrix of the (ln rho, angle) system, built by
// finite differences of the vector-form time derivative in the gradient slots.
std::array<double, 4> characteristic_matrix(const SOHSpeeds& s, double theta) {
  auto rate = [&](double r_x, double th_x) {
    const double w0 = std::cos(theta), w1 = std::sin(theta);
    const double dw0 = -std::sin(theta) * th_x, dw1 = std::cos(theta) * th_x;
    const double rho = 1.0, rho_x = rho * r_x;
    const double rho_t = -s.c1 * (rho_x * w0 + rho * dw0);
    // omega_t = -c2 w0 d_x omega - delta P (r_x e_x)
    const double p0 = r_x - w0 * (w0 * r_x), p1 = -w1 * (w0 * r_x);
    const double wt0 = -s.c2 * w0 * dw0 - s.delta * p0, wt1 = -s.c2 * w0 * dw1 - s.delta * p1;
    return std::array<double, 2>{rho_t / rho, w0 * wt1 - w1 * wt0};
  };
  const double e = 1e-6;
  std::array<double, 4> a{};
  for (int j = 0; j < 2; ++j) {
    const auto plus = rate(j == 0 ? e : 0.0, j == 1 ? e : 0.0);
    const auto minus = rate(j == 0 ? -e : 0.0, j == 1 ? -e : 0.0);
    for (int i = 0; i < 2; ++i) a[2 * i + j] = -(plus[i] - minus[i]) / (2.0 * e);
  }
  return a;
}

double measured_mode_speed(const SOHSpeeds& sp, double theta0, int sign) {
  const auto a = characteristic_matrix(sp, theta0);
  const double tr = a[0] + a[3], det = a[0] * a[3] - a[1] * a[2];
  const double lam = 0.5 * tr + sign * std::sqrt(0.25 * tr * tr - det);
  // right eigenvector (r, theta) and left eigenvector
  std::array<double, 2> rv = std::abs(a[1]) > 1e-14 ? std::array<double, 2>{a[1], lam - a[0]}
                                                     : (std::abs(lam - a[0]) < 1e-12 ? std::array<double, 2>{1.0, 0.0}
                                                                                      : std::array<double, 2>{0.0, 1.0});
  std::array<double, 2> lv = std::abs(a[2]) > 1e-14 ? std::array<double, 2>{a[2], lam - a[0]}
                                                     : (std::abs(lam - a[0]) < 1e-12 ? std::array<double, 2>{1.0, 0.0}
                                                                                      : std::array<double, 2>{0.0, 1.0});
  const int n = 800;
  SOHState s(line(n), sp);
  const double amp = 1e-3 / std::hypot(rv[0], rv[1]);
  for (std::size_t i = 0; i < s.cells(); ++i) {
    const double b = amp * bump(s.grid.x(i), 0.5, 0.04);
    s.set(i, std::exp(rv[0] * b), theta0 + rv[1] * b);
  }
  std::vector<double> times;
  std::vector<std::vector<double>> prof;
  SOHRunOptions opt;
  opt.snapshot_every = 0.05;
  opt.observer = [&](const SOHState& st) {
    std::vector<double> v(st.cells());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = lv[0] * std::log(st.rho[i]) + lv[1] * (st.angle(i) - theta0);
    if (lv[0] * rv[0] + lv[1] * rv[1] < 0.0)
      for (auto& x : v) x = -x;
    times.push_back(st.time);
    prof.push_back(std::move(v));
  };
  soh_integrate(s, 0.3, opt);
  const double measured = fit_front_speed(times, prof, s.grid.spacing(0));
  EXPECT_NEAR(measured, lam, 0.05 * std::abs(lam)) << "theta0 " << theta0 << " sign " << sign;
  return measured;
}

SOHState pulse_pair(int n, const SOHSpeeds& sp, double rho_amp, double theta_amp, double w) {
  SOHState s(line(n), sp);
  for (std::size_t i = 0; i < s.cells(); ++i) {
    const double b = bump(s.grid.x(i), 0.5, w);
    s.set(i, 1.0 + rho_amp * b, theta_amp * b);
  }
  return s;
}

// Relative L1 distance between the run and its initial data shifted by c*t
// (an integer number of cells), summed over density and angle pulses.
double comoving_defect(const SOHState& init, const SOHState& fin, int shift) {
  const std::size_t n = init.cells();
  double dr = 0, nr = 0, dt = 0, nt = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = (i + n - static_cast<std::size_t>(shift) % n) % n;
    dr += std::abs(fin.rho[i] - init.rho[src]);
    nr += std::abs(init.rho[src] - 1.0);
    dt += std::abs(fin.angle(i) - init.angle(src));
    nt += std::abs(init.angle(src));
  }
  return dr / nr + dt / nt;
}
}  // namespace

TEST(SOH, SpeedsFromCoefficients) {
  ModelParams p;
  p.diff = 0.2;
  auto c = derive(p);
  auto s = soh_speeds(c);
  EXPECT_DOUBLE_EQ(s.c1, std::sqrt(0.2));
  EXPECT_DOUBLE_EQ(s.c2, s.c1);
  EXPECT_DOUBLE_EQ(s.delta, 0.2 / std::sqrt(0.2));
  c = derive_with_alpha(p, 0.1);
  s = soh_speeds(c);
  EXPECT_DOUBLE_EQ(s.c2, 0.85 * s.c1);
  p.diff = 0.4;
  EXPECT_THROW(soh_speeds(derive(p)), RegimeError);
}

TEST(SOH, UniformStateIsSteady) {
  SOHState s(line(64), {0.5, 0.4, 0.3});
  for (std::size_t i = 0; i < s.cells(); ++i) s.set(i, 2.0, 0.7);
  const auto init = s;
  for (int k = 0; k < 20; ++k) s = soh_step(s, 0.01);
  for (std::size_t i = 0; i < s.cells(); ++i) {
    ASSERT_NEAR(s.rho[i], 2.0, 1e-14);
    ASSERT_NEAR(s.omega[2 * i], init.omega[2 * i], 1e-14);
    ASSERT_NEAR(s.omega[2 * i + 1], init.omega[2 * i + 1], 1e-14);
  }
}

TEST(SOH, AlignedGradientKeepsDirectionAndAdvects) {
  const SOHSpeeds sp{0.6, 0.5, 0.4};
  SOHState s(line(400), sp);
  for (std::size_t i = 0; i < s.cells(); ++i) s.set(i, 1.0 + 0.3 * bump(s.grid.x(i), 0.3, 0.05), 0.0);
  std::vector<double> times;
  std::vector<std::vector<double>> prof;
  SOHRunOptions opt;
  opt.snapshot_every = 0.1;
  opt.observer = [&](const SOHState& st) {
    times.push_back(st.time);
    prof.push_back(st.rho);
    for (std::size_t i = 0; i < st.cells(); ++i) ASSERT_EQ(st.omega[2 * i + 1], 0.0);
  };
  const double m0 = s.mass();
  s = soh_integrate(s, 0.5, opt);
  EXPECT_NEAR(fit_front_speed(times, prof, s.grid.spacing(0)), 0.6, 0.03 * 0.6);
  EXPECT_NEAR(s.mass(), m0, 1e-12 * m0);
  for (std::size_t i = 0; i < s.cells(); ++i) ASSERT_EQ(s.omega[2 * i + 1], 0.0);
}

TEST(SOH, LinearisedModeSpeedsMatchEigenvalues) {
  const SOHSpeeds sp{1.0, 0.85, 0.3};
  for (double theta0 : {0.0, 0.7})
    for (int sign : {-1, 1}) measured_mode_speed(sp, theta0, sign);
}

TEST(SOH, MassAndNormPreserved) {
  const SOHSpeeds sp{0.45, 0.4, 0.45};
  SpatialGrid g{2, 48, 40, 1.0, 1.0};
  SOHState s(g, sp);
  for (std::size_t i = 0; i < s.cells(); ++i)
    s.set(i, 1.0 + 0.3 * std::sin(2 * kPi * g.x(i)) * std::cos(2 * kPi * g.y(i)), 0.4 + 0.5 * std::sin(2 * kPi * g.y(i)));
  const double m0 = s.mass();
  for (int k = 0; k < 50; ++k) {
    s = soh_step(s, 0.8 * soh_stable_dt(s));
    ASSERT_LE(s.max_norm_defect(), 1e-12);
  }
  EXPECT_NEAR(s.mass(), m0, 1e-12 * m0);
}

TEST(SOH, NormDriftIsFirstOrderWithoutRenormalisation) {
  const SOHSpeeds sp{1.0, 0.8, 0.3};
  SOHState u(line(128), sp);
  for (std::size_t i = 0; i < u.cells(); ++i) u.set(i, 1.0, 0.3);
  SOHOptions fe{Reconstruction::first_order, TimeIntegrator::forward_euler};
  EXPECT_EQ(norm_drift_probe(u, 20, 1e-3, fe), 0.0);
  SOHState s(line(128), sp);
  for (std::size_t i = 0; i < s.cells(); ++i)
    s.set(i, 1.0 + 0.2 * std::sin(2 * kPi * s.grid.x(i)), 0.5 * std::cos(2 * kPi * s.grid.x(i)));
  const double d1 = norm_drift_probe(s, 40, 2e-3, fe);
  const double d2 = norm_drift_probe(s, 80, 1e-3, fe);
  EXPECT_GT(d1, 1e-8);
  EXPECT_NEAR(d2 / d1, 0.5, 0.05);
  SOHOptions on = fe;
  auto r = s;
  for (int k = 0; k < 40; ++k) r = soh_step(r, 2e-3, on);
  EXPECT_LE(r.max_norm_defect(), 1e-12);
}

TEST(SOH, GalileanMarker) {
  const int n = 512;
  const int shift = 128;  // c t / h with c = 1, t = 0.25
  const auto same = pulse_pair(n, {1.0, 1.0, 0.05}, 0.02, 0.01, 0.08);
  const auto f_same = soh_integrate(same, 0.25);
  const double d_same = comoving_defect(same, f_same, shift);
  const auto diff = pulse_pair(n, {1.0, 0.85, 0.05}, 0.02, 0.01, 0.08);
  const double d_diff = comoving_defect(diff, soh_integrate(diff, 0.25), shift);
  EXPECT_LT(d_same, 0.01);
  EXPECT_GT(d_diff, 5.0 * 0.01);
}

TEST(SOH, CflGuard) {
  SOHState s(line(64), {1.0, 1.0, 0.2});
  EXPECT_THROW(soh_step(s, 0.1), StabilityError);
  s.rho[4] = 0.0;
  EXPECT_THROW(soh_step(s, 1e-3), VacuumError);
}

TEST(Diffusion, GaussianVarianceGrowsLinearly) {
  for (auto mode : {DiffusionMode::explicit_euler, DiffusionMode::trapezoidal}) {
    DiffusionState s{line(512), {}, 0.5, 0.0};
    const double var0 = 0.03 * 0.03;
    for (std::size_t i = 0; i < s.grid.cells(); ++i) s.rho.push_back(periodic_gaussian(s.grid.x(i), 0.5, var0, 1.0));
    const double m0 = s.mass();
    const double h = s.grid.spacing(0);
    const double dt = mode == DiffusionMode::explicit_euler ? 0.2 * h * h / s.d_diff : 1e-4;
    const int steps = static_cast<int>(std::round(0.002 / dt));
    for (int k = 0; k < steps; ++k) s = diffusion_step(s, dt, mode).state;
    double m = 0, v = 0;
    for (std::size_t i = 0; i < s.grid.cells(); ++i) {
      const double x = s.grid.x(i) - 0.5;
      m += s.rho[i] * h;
      v += s.rho[i] * x * x * h;
    }
    v /= m;
    EXPECT_NEAR(s.mass(), m0, 1e-12 * m0);
    const double expect = var0 + 2.0 * s.d_diff * s.time;
    EXPECT_NEAR(v, expect, 0.01 * (expect - var0));
  }
}

TEST(Diffusion, UniformStationaryAndVelocity) {
  DiffusionState s{line(32), std::vector<double>(32, 2.0), 1.0, 0.0};
  const auto r = diffusion_step(s, 1e-4);
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_EQ(r.state.rho[i], 2.0);
    EXPECT_EQ(r.velocity[i], 0.0);
  }
  EXPECT_THROW(diffusion_step(s, 1.0), StabilityError);
  EXPECT_NO_THROW(diffusion_step(s, 1.0, DiffusionMode::trapezoidal));
  DiffusionState g{line(200), {}, 0.5, 0.0};
  for (std::size_t i = 0; i < 200; ++i) g.rho.push_back(1.0 + 0.5 * std::sin(2 * kPi * g.grid.x(i)));
  const auto u = diffusion_velocity(g);
  const double x = g.grid.x(10);
  const double expect = -0.5 * (0.5 * 2 * kPi * std::cos(2 * kPi * x)) / (1.0 + 0.5 * std::sin(2 * kPi * x));
  EXPECT_NEAR(u[10], expect, 1e-3 * std::abs(expect));
}

TEST(Diffusion, CoefficientDrivesSpreading) {
  ModelParams p;
  p.diff = 0.5;
  const auto c = derive(p);  // d = 2: T_c = 1/4, D_diff = 0.5
  EXPECT_DOUBLE_EQ(*c.d_diff, 0.5);
  p.dim = 1;
  EXPECT_DOUBLE_EQ(*derive(p).d_diff, 1.0);
  DiffusionState s{line(256), {}, *c.d_diff, 0.0};
  for (std::size_t i = 0; i < 256; ++i) s.rho.push_back(1.0 + std::cos(2 * kPi * s.grid.x(i)));
  for (int k = 0; k < 100; ++k) s = diffusion_step(s, 1e-4, DiffusionMode::trapezoidal).state;
  const double amp = 0.5 * (s.rho[0] - s.rho[128]) / std::cos(2 * kPi * s.grid.x(0));
  const double lam = 4.0 * std::pow(std::sin(kPi / 256), 2) * 256 * 256;
  const double z = 0.5 * 1e-4 * 0.5 * lam;
  EXPECT_NEAR(amp, std::pow((1.0 - z) / (1.0 + z), 100), 1e-12);
  EXPECT_NEAR(amp, std::exp(-0.5 * 4 * kPi * kPi * 0.01), 1e-4);
}
