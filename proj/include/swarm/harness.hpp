#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/coeffs.hpp"
#include "swarm/config.hpp"
#include "swarm/hydro.hpp"
#include "swarm/parallel.hpp"
#include "swarm/particles.hpp"
#include "swarm/soh.hpp"

#ifndef SWARM_VERSION
#define SWARM_VERSION "dev"
#endif

namespace swarm {

inline std::string fmt_num(double x, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

// ---------------------------------------------------------------- reports

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  void add_numbers(const std::vector<double>& row) {
    std::vector<std::string> r;
    for (double x : row) r.push_back(fmt_num(x));
    rows.push_back(std::move(r));
  }
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  double seconds = 0.0;
};

struct RunReport {
  std::string scenario;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::string version = SWARM_VERSION;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<CriterionResult> criteria;
  std::vector<std::string> flags;

  void note(const std::string& key, const std::string& value) { summary.emplace_back(key, value); }
  void note(const std::string& key, double value) { summary.emplace_back(key, fmt_num(value)); }
  Table& table(const std::string& name, std::vector<std::string> header) {
    tables.push_back({name, std::move(header), {}});
    return tables.back();
  }
  bool passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
  }
};

// Writes <scenario>_<table>.csv per table and <scenario>_summary.txt
// (key=value). Returns the process exit code: 0 when every criterion passed.
inline int emit_outputs(const RunReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
  auto open = [&](const std::string& file) {
    std::ofstream out(dir / file);
    if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
    return out;
  };
  const std::string stem = report.scenario.empty() ? "run" : report.scenario;
  for (const auto& t : report.tables) {
    auto out = open(stem + "_" + t.name + ".csv");
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << '\n';
    }
  }
  auto out = open(stem + "_summary.txt");
  out << "version=" << report.version << '\n';
  out << "scenario=" << report.scenario << '\n';
  out << "config_hash=" << report.config_hash << '\n';
  out << "seeds=";
  for (std::size_t i = 0; i < report.seeds.size(); ++i) out << (i ? "," : "") << report.seeds[i];
  out << '\n';
  for (const auto& [k, v] : report.summary) out << k << '=' << v << '\n';
  for (const auto& f : report.flags) out << "flag=" << f << '\n';
  std::vector<std::string> failed;
  for (const auto& c : report.criteria) {
    out << "criterion_" << c.id << '=' << (c.passed ? "PASS" : "FAIL") << " (" << c.name << "; " << c.measured
        << ")\n";
    if (!c.passed) failed.push_back(std::to_string(c.id) + " " + c.name);
  }
  out << "status=" << (failed.empty() ? "PASS" : "FAIL") << '\n';
  for (const auto& f : failed) out << "failed=" << f << '\n';
  return failed.empty() ? 0 : 1;
}

// ---------------------------------------------------------------- configs

struct ScenarioConfig {
  std::string id = "scenario";
  ModelParams model;
  double alpha = 0.0;
  std::string solver = "euler";
  std::string sweep_name;
  std::vector<double> sweep_values;
  int cells = 256;
  double box = 1.0;
  std::size_t particles = 1024;
  double dt = 0.0;
  double t_end = 1.0;
  std::vector<std::uint64_t> seeds{0};
  int threads = 1;
  std::string out_dir = "out";
  Config source;

  std::string hash() const { return source.hash(); }

  // [scenario] id, solver, alpha, cells, box, particles, dt, t_end, seeds,
  // threads, out_dir, sweep (name), values (list); [model] as in
  // load_model_params.
  static ScenarioConfig from_config(const Config& cfg) {
    ScenarioConfig s;
    s.source = cfg;
    s.model = load_model_params(cfg);
    s.id = cfg.get<std::string>("scenario.id", s.id);
    s.solver = cfg.get<std::string>("scenario.solver", s.solver);
    s.alpha = cfg.get("scenario.alpha", s.alpha);
    s.cells = cfg.get("scenario.cells", s.cells);
    s.box = cfg.get("scenario.box", s.box);
    s.particles = cfg.get<std::size_t>("scenario.particles", s.particles);
    s.dt = cfg.get("scenario.dt", s.dt);
    s.t_end = cfg.get("scenario.t_end", s.t_end);
    s.threads = cfg.get("scenario.threads", s.threads);
    s.out_dir = cfg.get<std::string>("scenario.out_dir", s.out_dir);
    s.sweep_name = cfg.get<std::string>("scenario.sweep", "");
    s.sweep_values = cfg.get_list("scenario.values", {});
    if (cfg.has("scenario.seeds")) {
      s.seeds.clear();
      for (double v : cfg.get_list("scenario.seeds", {})) s.seeds.push_back(static_cast<std::uint64_t>(v));
    }
    s.validate();
    return s;
  }

  void validate() const {
    model.validate();
    if (cells < 3) throw std::invalid_argument("scenario needs at least 3 cells");
    if (!(box > 0.0)) throw std::invalid_argument("box length must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (dt < 0.0) throw std::invalid_argument("dt must be non-negative (0 = automatic)");
    if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  }
};

// ---------------------------------------------------------------- shared helpers

// Sum |a - ref| over sum |ref - base|: error relative to the perturbation.
inline double perturbation_l1(const std::vector<double>& a, const std::vector<double>& ref, double base) {
  double e = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    e += std::abs(a[i] - ref[i]);
    n += std::abs(ref[i] - base);
  }
  return n > 0.0 ? e / n : e;
}

inline double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Closed-form heat solution on the unit-periodic line for a Gaussian pulse of
// width w on a constant background.
inline double periodic_heat_pulse(double x, double t, double diff, double center, double width, double background,
                                  double amplitude) {
  const double var = width * width + 2.0 * diff * t;
  double v = 0.0;
  for (int k = -6; k <= 6; ++k) {
    const double y = x - center + k;
    v += std::exp(-y * y / (2.0 * var));
  }
  return background + amplitude * width / std::sqrt(var) * v;
}

// rho = 1 + rho_amp sin(2 pi x), theta = theta_amp cos(2 pi x), |u| = speed.
struct OrderedProfile {
  double rho_amp = 0.2;
  double theta_amp = 0.4;
};

inline FluidState ordered_fluid(const SpatialGrid& g, double speed, const OrderedProfile& p) {
  FluidState f(g, 2);
  for (std::size_t i = 0; i < f.cells(); ++i) {
    const double x = 2.0 * std::numbers::pi * g.x(i);
    const double th = p.theta_amp * std::cos(x);
    f.set(i, 1.0 + p.rho_amp * std::sin(x), {speed * std::cos(th), speed * std::sin(th)});
  }
  return f;
}

inline SOHState ordered_soh(const SpatialGrid& g, const SOHSpeeds& sp, const OrderedProfile& p) {
  SOHState s(g, sp);
  for (std::size_t i = 0; i < s.cells(); ++i) {
    const double x = 2.0 * std::numbers::pi * g.x(i);
    s.set(i, 1.0 + p.rho_amp * std::sin(x), p.theta_amp * std::cos(x));
  }
  return s;
}

struct FluidSOHDistance {
  double rho = 0.0;    // perturbation-relative L1
  double omega = 0.0;  // perturbation-relative L1 of the direction field
  double max_speed_gap = 0.0;
};

inline FluidSOHDistance fluid_soh_distance(const FluidState& f, const SOHState& s) {
  FluidSOHDistance d;
  std::vector<double> dir(2 * f.cells());
  for (std::size_t i = 0; i < f.cells(); ++i) {
    const double sp = f.speed(i);
    dir[2 * i] = f.velocity(i, 0) / sp;
    dir[2 * i + 1] = f.velocity(i, 1) / sp;
  }
  d.rho = perturbation_l1(f.rho, s.rho, mean_of(s.rho));
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < s.cells(); ++i) mx += s.omega[2 * i], my += s.omega[2 * i + 1];
  mx /= s.cells(), my /= s.cells();
  double e = 0.0, n = 0.0;
  for (std::size_t i = 0; i < s.cells(); ++i) {
    e += std::abs(dir[2 * i] - s.omega[2 * i]) + std::abs(dir[2 * i + 1] - s.omega[2 * i + 1]);
    n += std::abs(s.omega[2 * i] - mx) + std::abs(s.omega[2 * i + 1] - my);
  }
  d.omega = n > 0.0 ? e / n : e;
  return d;
}

// ---------------------------------------------------------------- phase sweep

struct PhaseSweepSettings {
  std::vector<double> temp_ratios{0.2, 0.6, 1.0, 1.4, 2.0};  // T / T_c
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t particles = 1024;
  double t_end = 5.0;
  double average_fraction = 0.4;  // trailing part of the run that is averaged
  double trend_threshold = 0.05;  // |slope| * window length above this flags the run
  double initial_speed = 0.5;     // mean velocity of the initial ensemble, in units of a
  int dx = 1;
  int threads = 1;
};

struct PhaseRun {
  double temp_ratio = 0.0;
  double temp = 0.0;
  std::uint64_t seed = 0;
  double phi = 0.0;
  double fluid_speed = 0.0;  // time-averaged |sum v| / N
  double trend = 0.0;
  bool equilibrated = true;
};

struct PhaseSweepResult {
  std::vector<PhaseRun> runs;
  std::vector<double> temp_ratios;
  std::vector<double> mean_phi;
  std::vector<double> mean_fluid_speed;
  std::optional<double> crossing;  // T/T_c where mean phi crosses half its range
  bool strictly_decreasing = false;
};

// Slope of y against x by least squares.
inline double trend_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return n > 1 && sxx > 0.0 ? sxy / sxx : 0.0;
}

// Particle run with the given parameters; phi and |sum v|/N averaged over
// the trailing window.
inline PhaseRun equilibrium_run(const ModelParams& m, std::uint64_t seed, const PhaseSweepSettings& s) {
  const auto p = particle_params(m);
  const double dt = 0.1 * std::min(p.tau, p.sigma);
  auto st = uniform_particles(s.particles, 1.0, s.dx, m.dim, seed, {s.initial_speed * m.a},
                              std::sqrt(m.temperature()));
  const auto steps = static_cast<std::size_t>(std::ceil(s.t_end / dt - 1e-9));
  const double t_avg = s.t_end * (1.0 - s.average_fraction);
  std::vector<double> times, phis, speeds;
  ParticleRunOptions o;
  o.dt = dt;
  o.steps = steps;
  o.output_every = std::max<std::size_t>(1, steps / 100);
  o.step.threads = 1;
  o.observer = [&](const ParticleState& ps) {
    if (ps.time < t_avg - 1e-12) return;
    times.push_back(ps.time);
    phis.push_back(order_parameter(ps));
    std::vector<double> sum(ps.vdim, 0.0);
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (int k = 0; k < ps.vdim; ++k) sum[k] += ps.vel(i, k);
    double q = 0.0;
    for (double v : sum) q += v * v;
    speeds.push_back(std::sqrt(q) / static_cast<double>(ps.size()));
  };
  run_particles(st, p, o);
  PhaseRun r;
  r.temp = m.temperature();
  r.seed = seed;
  r.phi = mean_of(phis);
  r.fluid_speed = mean_of(speeds);
  const double window = times.empty() ? 0.0 : times.back() - times.front();
  r.trend = trend_slope(times, phis) * window;
  r.equilibrated = std::abs(r.trend) <= s.trend_threshold;
  return r;
}

inline PhaseSweepResult phase_sweep(const ModelParams& base, const PhaseSweepSettings& s) {
  if (s.particles < 1024) throw std::invalid_argument("phase sweep needs N >= 1024");
  const double tc = base.a * base.a / (base.dim + 2);
  struct Job {
    double ratio;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double r : s.temp_ratios)
    for (auto seed : s.seeds) jobs.push_back({r, seed});
  std::vector<PhaseRun> runs(jobs.size());
  // runs are independent; each one is serial so the result does not depend
  // on the thread count
  parallel_for(jobs.size(), s.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      ModelParams m = base;
      m.diff = jobs[j].ratio * tc / m.sigma;
      runs[j] = equilibrium_run(m, jobs[j].seed, s);
      runs[j].temp_ratio = jobs[j].ratio;
    }
  });

  PhaseSweepResult res;
  res.runs = runs;
  for (double r : s.temp_ratios) {
    double phi = 0.0, speed = 0.0;
    int n = 0;
    for (const auto& run : runs)
      if (run.temp_ratio == r) phi += run.phi, speed += run.fluid_speed, ++n;
    res.temp_ratios.push_back(r);
    res.mean_phi.push_back(phi / n);
    res.mean_fluid_speed.push_back(speed / n);
  }
  res.strictly_decreasing = true;
  for (std::size_t i = 1; i < res.mean_phi.size(); ++i)
    if (!(res.mean_phi[i] < res.mean_phi[i - 1])) res.strictly_decreasing = false;
  if (res.mean_phi.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(res.mean_phi.begin(), res.mean_phi.end());
    const double mid = 0.5 * (*lo + *hi);
    for (std::size_t i = 1; i < res.mean_phi.size() && !res.crossing; ++i) {
      const double a = res.mean_phi[i - 1] - mid, b = res.mean_phi[i] - mid;
      if (a >= 0.0 && b < 0.0)
        res.crossing = res.temp_ratios[i - 1] + a / (a - b) * (res.temp_ratios[i] - res.temp_ratios[i - 1]);
    }
  }
  return res;
}

inline RunReport phase_report(const std::string& id, const PhaseSweepResult& r, const std::vector<std::uint64_t>& seeds) {
  RunReport rep;
  rep.scenario = id;
  rep.seeds = seeds;
  auto& runs = rep.table("runs", {"temp_ratio", "temp", "seed", "phi", "fluid_speed", "trend", "equilibrated"});
  for (const auto& x : r.runs) {
    runs.add({fmt_num(x.temp_ratio), fmt_num(x.temp), std::to_string(x.seed), fmt_num(x.phi), fmt_num(x.fluid_speed),
              fmt_num(x.trend), x.equilibrated ? "1" : "0"});
    if (!x.equilibrated)
      rep.flags.push_back("not equilibrated: T/T_c=" + fmt_num(x.temp_ratio) + " seed=" + std::to_string(x.seed));
  }
  auto& avg = rep.table("averaged", {"temp_ratio", "mean_phi", "mean_fluid_speed"});
  for (std::size_t i = 0; i < r.temp_ratios.size(); ++i)
    avg.add_numbers({r.temp_ratios[i], r.mean_phi[i], r.mean_fluid_speed[i]});
  rep.note("strictly_decreasing", r.strictly_decreasing ? "1" : "0");
  if (r.crossing) rep.note("crossing_temp_ratio", *r.crossing);
  return rep;
}

// ---------------------------------------------------------------- tau limit

struct DiffusiveLimitSettings {
  int cells = 256;
  double width = 0.05;
  double background = 0.2;
  double amplitude = 1.0;
  double heat_time = 0.0025;  // matched time in the diffusive clock t' = tau t
  Reconstruction recon = Reconstruction::muscl_mc;
  double relax_resolution = 0.2;
};

struct OrderedLimitSettings {
  int cells = 256;
  double t_end = 0.5;
  OrderedProfile profile;
  double snapshot_every = 0.05;
};

struct TauLimitRow {
  double tau = 0.0;
  double rho_distance = 0.0;
  double omega_distance = 0.0;  // ordered branch only
  double max_speed_gap = 0.0;   // ordered branch only
  double norm_defect = 0.0;     // ordered branch only: SOH max ||omega| - 1|
};

struct TauLimitResult {
  bool diffusive = false;
  std::vector<TauLimitRow> rows;
  bool decreasing = false;
};

enum class LimitBranch { automatic, diffusive, ordered };

// Diffusive branch (T > T_c): Euler from a Gaussian pulse run to t = t'/tau
// against the heat solution with D_diff at t'. Ordered branch (T < T_c):
// Euler against SOH with (c, c, T/c) from matched initial data.
inline TauLimitResult limit_study_tau(const ModelParams& base, const std::vector<double>& taus,
                                      LimitBranch branch = LimitBranch::automatic,
                                      const DiffusiveLimitSettings& ds = {}, const OrderedLimitSettings& os = {}) {
  TauLimitResult res;
  const auto c0 = derive(base);
  if (c0.temp == c0.temp_crit) throw RegimeError("tau limit undefined at T = T_c");
  res.diffusive = c0.temp > c0.temp_crit;
  if ((branch == LimitBranch::diffusive && !res.diffusive) || (branch == LimitBranch::ordered && res.diffusive))
    throw RegimeError(std::string("regime mismatch: ") + (res.diffusive ? "T > T_c needs the diffusive branch"
                                                                         : "T < T_c needs the ordered (SOH) branch"));
  for (double tau : taus) {
    ModelParams p = base;
    p.tau = tau;
    const auto c = derive(p);
    TauLimitRow row;
    row.tau = tau;
    if (res.diffusive) {
      SpatialGrid g;
      g.nx = ds.cells;
      FluidState s(g, base.dim);
      std::vector<double> zero(base.dim, 0.0);
      for (std::size_t i = 0; i < s.cells(); ++i)
        s.set(i, periodic_heat_pulse(g.x(i), 0.0, *c.d_diff, 0.5, ds.width, ds.background, ds.amplitude), zero);
      HydroRunOptions o;
      o.step.recon = ds.recon;
      o.relax_resolution = ds.relax_resolution;
      const auto f = integrate(s, c, HydroSolver::euler, ds.heat_time / tau, o);
      std::vector<double> heat(f.cells());
      for (std::size_t i = 0; i < f.cells(); ++i)
        heat[i] = periodic_heat_pulse(g.x(i), ds.heat_time, *c.d_diff, 0.5, ds.width, ds.background, ds.amplitude);
      row.rho_distance = perturbation_l1(f.rho, heat, ds.background);
    } else {
      SpatialGrid g;
      g.nx = os.cells;
      const auto sp = soh_speeds(c);
      HydroRunOptions o;
      o.snapshot_every = os.snapshot_every;
      o.observer = [&](const FluidState& st) {
        for (std::size_t i = 0; i < st.cells(); ++i)
          row.max_speed_gap = std::max(row.max_speed_gap, std::abs(st.speed(i) - sp.c1));
      };
      const auto f = integrate(ordered_fluid(g, sp.c1, os.profile), c, HydroSolver::euler, os.t_end, o);
      const auto s = soh_integrate(ordered_soh(g, sp, os.profile), os.t_end);
      const auto d = fluid_soh_distance(f, s);
      row.rho_distance = d.rho;
      row.omega_distance = d.omega;
      row.norm_defect = s.max_norm_defect();
    }
    res.rows.push_back(row);
  }
  // ordered from largest to smallest tau
  std::vector<TauLimitRow> sorted = res.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.tau > b.tau; });
  res.decreasing = true;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (!(sorted[i].rho_distance < sorted[i - 1].rho_distance)) res.decreasing = false;
    if (!res.diffusive && !(sorted[i].omega_distance < sorted[i - 1].omega_distance)) res.decreasing = false;
  }
  return res;
}

// ---------------------------------------------------------------- alpha limit

struct AlphaLimitSettings {
  OrderedLimitSettings comparison;
  int tracking_cells = 400;
  double tracking_t_end = 0.5;
  double bump_amplitude = 0.02;
  double bump_width = 0.04;
};

struct AlphaLimitRow {
  double tau = 0.0;
  double eps = 0.0;
  double rho_distance = 0.0;
  double omega_distance = 0.0;
};

struct AlphaLimitResult {
  SOHSpeeds speeds;
  std::vector<AlphaLimitRow> rows;
  double density_speed = 0.0;     // measured, density feature
  double transverse_speed = 0.0;  // measured, direction feature
  double speed_ratio() const { return transverse_speed / density_speed; }
};

// Speed of a small localized bump riding on the uniform flow u = c1 x:
// a density bump when `transverse` is false, a direction bump otherwise.
inline double bump_speed(const DerivedCoefficients& c, HydroSolver solver, bool transverse, const AlphaLimitSettings& s) {
  const auto sp = soh_speeds(c);
  SpatialGrid g;
  g.nx = s.tracking_cells;
  const double x0 = 0.3;
  auto bump = [&](double x) {
    double y = x - x0;
    y -= std::nearbyint(y);
    return s.bump_amplitude * std::exp(-y * y / (2.0 * s.bump_width * s.bump_width));
  };
  FluidState f(g, 2);
  for (std::size_t i = 0; i < f.cells(); ++i) {
    const double th = transverse ? bump(g.x(i)) : 0.0;
    f.set(i, 1.0 + (transverse ? 0.0 : bump(g.x(i))), {sp.c1 * std::cos(th), sp.c1 * std::sin(th)});
  }
  std::vector<FluidState> history;
  HydroRunOptions o;
  o.snapshot_every = s.tracking_t_end / 10.0;
  // skip the initial transient in which the fast wave separates
  o.observer = [&](const FluidState& st) {
    if (st.time >= 0.2 * s.tracking_t_end - 1e-12) history.push_back(st);
  };
  integrate(f, c, solver, s.tracking_t_end, o);
  FrontTracking tr;
  const double t0 = 0.2 * s.tracking_t_end;
  tr.window = std::make_pair(x0 + t0 * std::min(sp.c1, sp.c2) - 0.15, x0 + t0 * std::max(sp.c1, sp.c2) + 0.15);
  if (transverse)
    tr.field = [](const FluidState& st, std::size_t i) { return st.velocity(i, 1); };
  else
    tr.field = [](const FluidState& st, std::size_t i) { return st.rho[i]; };
  return measure_front_speed(history, tr);
}

// NS with eps = kappa_alpha tau against the alpha-SOH system, and the
// measured speeds of density and direction features at the smallest tau.
inline AlphaLimitResult limit_study_alpha(const ModelParams& base, double alpha, const std::vector<double>& taus,
                                          const AlphaLimitSettings& s = {}) {
  if (taus.empty()) throw std::invalid_argument("alpha limit needs at least one tau");
  AlphaLimitResult res;
  for (double tau : taus) {
    ModelParams p = base;
    p.tau = tau;
    const auto c = derive_with_alpha(p, alpha);
    const auto sp = soh_speeds(c);
    res.speeds = sp;
    SpatialGrid g;
    g.nx = s.comparison.cells;
    const auto solver = alpha > 0.0 ? HydroSolver::navier_stokes : HydroSolver::euler;
    const auto f = integrate(ordered_fluid(g, sp.c1, s.comparison.profile), c, solver, s.comparison.t_end);
    const auto soh = soh_integrate(ordered_soh(g, sp, s.comparison.profile), s.comparison.t_end);
    const auto d = fluid_soh_distance(f, soh);
    res.rows.push_back({tau, c.eps, d.rho, d.omega});
  }
  ModelParams p = base;
  p.tau = *std::min_element(taus.begin(), taus.end());
  const auto c = derive_with_alpha(p, alpha);
  const auto solver = alpha > 0.0 ? HydroSolver::navier_stokes : HydroSolver::euler;
  res.density_speed = bump_speed(c, solver, false, s);
  res.transverse_speed = bump_speed(c, solver, true, s);
  return res;
}

// ---------------------------------------------------------------- particles vs Euler

struct CrossValidationSettings {
  std::vector<double> eps{0.1, 0.05};
  std::size_t particles = 4000;
  int bins = 32;
  int fluid_cells = 256;
  double t_end = 0.5;
  double pulse_amplitude = 0.5;
  double pulse_width = 0.1;
  std::vector<std::uint64_t> seeds{0, 1};
  double empty_bin_limit = 0.1;  // fraction of empty bins that aborts the comparison
  int threads = 1;
};

struct CrossValidationRow {
  double eps = 0.0;
  std::size_t particles = 0;
  double rho_distance = 0.0;  // seed-averaged relative L1
  double u_distance = 0.0;
};

// Cloud-in-cell moments of a quasi-1D ensemble on `bins` periodic cells.
// Mass per particle is total_mass / N.
inline void deposit_cic(const ParticleState& s, int bins, double total_mass, std::vector<double>& rho,
                        std::vector<double>& u) {
  const double h = s.box / bins;
  std::vector<double> w(bins, 0.0), m(bins * s.vdim, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double y = s.pos(i, 0) / h - 0.5;
    const double fl = std::floor(y);
    const double frac = y - fl;
    const int left = ((static_cast<int>(fl) % bins) + bins) % bins, right = (left + 1) % bins;
    w[left] += 1.0 - frac;
    w[right] += frac;
    for (int k = 0; k < s.vdim; ++k) {
      m[left * s.vdim + k] += (1.0 - frac) * s.vel(i, k);
      m[right * s.vdim + k] += frac * s.vel(i, k);
    }
  }
  const double per = total_mass / static_cast<double>(s.size());
  rho.assign(bins, 0.0);
  u.assign(bins * s.vdim, std::numeric_limits<double>::quiet_NaN());
  for (int b = 0; b < bins; ++b) {
    rho[b] = per * w[b] / h;
    if (w[b] > 0.0)
      for (int k = 0; k < s.vdim; ++k) u[b * s.vdim + k] = m[b * s.vdim + k] / w[b];
  }
}

// Quasi-1D ensemble with density proportional to rho0 (rejection sampling)
// and velocities u0 + sqrt(T) N(0, 1).
inline ParticleState sample_fluid(const std::function<double(double)>& rho0, double rho_max, std::size_t n,
                                  const std::vector<double>& u0, double temp, std::uint64_t seed) {
  ParticleState s;
  s.box = 1.0;
  s.dx = 1;
  s.vdim = static_cast<int>(u0.size());
  s.rng_seed = seed;
  std::mt19937_64 gen(seed * 0x2545f4914f6cdd1dull + 17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (s.positions.size() < n) {
    const double x = unit(gen);
    if (unit(gen) * rho_max <= rho0(x)) s.positions.push_back(x);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (double c : u0) s.velocities.push_back(c + std::sqrt(temp) * gauss(gen));
  s.seed_streams();
  return s;
}

inline std::vector<CrossValidationRow> cross_validate_particles_euler(const ModelParams& base,
                                                                      const CrossValidationSettings& s) {
  const auto c = derive(base);
  if (!c.comfort_speed) throw RegimeError("particle/Euler comparison is set up in the ordered regime (T < T_c)");
  if (s.fluid_cells % s.bins) throw std::invalid_argument("fluid cells must be a multiple of the bin count");
  const double speed = *c.comfort_speed;
  auto rho0 = [&](double x) {
    const double y = x - 0.5;
    return 1.0 + s.pulse_amplitude * std::exp(-y * y / (2.0 * s.pulse_width * s.pulse_width));
  };
  SpatialGrid g;
  g.nx = s.fluid_cells;
  FluidState f(g, base.dim);
  std::vector<double> u0(base.dim, 0.0);
  u0[0] = speed;
  for (std::size_t i = 0; i < f.cells(); ++i) f.set(i, rho0(g.x(i)), u0);
  const double mass = f.mass();
  const auto fe = integrate(f, c, HydroSolver::euler, s.t_end);
  const int per_bin = s.fluid_cells / s.bins;
  std::vector<double> rho_ref(s.bins, 0.0), u_ref(s.bins * base.dim, 0.0);
  for (int b = 0; b < s.bins; ++b) {
    for (int j = 0; j < per_bin; ++j) {
      const std::size_t i = b * per_bin + j;
      rho_ref[b] += fe.rho[i] / per_bin;
      for (int k = 0; k < base.dim; ++k) u_ref[b * base.dim + k] += fe.velocity(i, k) / per_bin;
    }
  }

  std::vector<CrossValidationRow> rows;
  for (double eps : s.eps) {
    ModelParams m = base;
    m.eps = eps;
    const auto p = particle_params(m);
    const double dt = 0.1 * std::min(p.tau, p.sigma);
    const auto steps = static_cast<std::size_t>(std::ceil(s.t_end / dt - 1e-9));
    std::vector<double> dr(s.seeds.size()), du(s.seeds.size());
    parallel_for(s.seeds.size(), s.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        auto st = sample_fluid(rho0, 1.0 + s.pulse_amplitude, s.particles, u0, base.temperature(), s.seeds[k]);
        ParticleRunOptions o;
        o.dt = s.t_end / steps;
        o.steps = steps;
        run_particles(st, p, o);
        std::vector<double> rho, u;
        deposit_cic(st, s.bins, mass, rho, u);
        const auto empty = std::count(rho.begin(), rho.end(), 0.0);
        if (empty > s.empty_bin_limit * s.bins)
          throw std::runtime_error("sampling underflow: " + std::to_string(empty) + " empty bins of " +
                                   std::to_string(s.bins));
        double er = 0.0, nr = 0.0, eu = 0.0, nu = 0.0;
        for (int bb = 0; bb < s.bins; ++bb) {
          er += std::abs(rho[bb] - rho_ref[bb]);
          nr += rho_ref[bb];
          for (int kk = 0; kk < base.dim; ++kk) {
            const double v = u[bb * base.dim + kk];
            if (std::isnan(v)) continue;
            eu += std::abs(v - u_ref[bb * base.dim + kk]);
            nu += std::abs(u_ref[bb * base.dim + kk]);
          }
        }
        dr[k] = er / nr;
        du[k] = nu > 0.0 ? eu / nu : eu;
      }
    });
    rows.push_back({eps, s.particles, mean_of(dr), mean_of(du)});
  }
  return rows;
}

// ---------------------------------------------------------------- Galilean marker

struct GalileanSettings {
  int cells = 512;
  double t_end = 0.25;
  double rho_amp = 0.02;
  double theta_amp = 0.01;
  double width = 0.08;
};

// Runs SOH from co-located density and angle pulses on the flow omega = x and
// compares with the initial data translated by c1 t. Returns the summed
// relative L1 defects of density and angle. c1 t must be a whole number of
// cells.
inline double galilean_defect(const SOHSpeeds& sp, const GalileanSettings& s = {}) {
  SpatialGrid g;
  g.nx = s.cells;
  const double cells_moved = sp.c1 * s.t_end / g.spacing(0);
  const long shift = std::lround(cells_moved);
  if (std::abs(cells_moved - static_cast<double>(shift)) > 1e-9)
    throw std::invalid_argument("c1 * t_end must be a whole number of cells for the co-moving comparison");
  SOHState init(g, sp);
  for (std::size_t i = 0; i < init.cells(); ++i) {
    double y = g.x(i) - 0.5;
    const double b = std::exp(-y * y / (2.0 * s.width * s.width));
    init.set(i, 1.0 + s.rho_amp * b, s.theta_amp * b);
  }
  const auto fin = soh_integrate(init, s.t_end);
  const std::size_t n = init.cells();
  double dr = 0, nr = 0, da = 0, na = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = (i + n - static_cast<std::size_t>(shift) % n) % n;
    dr += std::abs(fin.rho[i] - init.rho[src]);
    nr += std::abs(init.rho[src] - 1.0);
    da += std::abs(fin.angle(i) - init.angle(src));
    na += std::abs(init.angle(src));
  }
  return dr / nr + da / na;
}

}  // namespace swarm
