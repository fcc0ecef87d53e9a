#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "swarm/acceptance.hpp"
#include "swarm/closure.hpp"
#include "swarm/coeffs.hpp"
#include "swarm/config.hpp"
#include "swarm/harness.hpp"
#include "swarm/hydro.hpp"
#include "swarm/kinetic.hpp"
#include "swarm/particles.hpp"
#include "swarm/soh.hpp"

namespace fs = std::filesystem;
using namespace swarm;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Globals {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int threads = 1;
  bool deterministic = false;

  Config load() const {
    Config c = config.empty() ? Config{} : Config::from_file(config);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got " + kv);
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return c;
  }
  ModelParams model() const { return load_model_params(load()); }
  fs::path out_dir() const {
    if (!out.empty()) return out;
    if (const char* env = std::getenv("SWARM_OUT_DIR")) return env;
    return "out";
  }
  int thread_count() const { return deterministic ? 1 : resolve_threads(threads); }
  std::ofstream open(const std::string& name) const {
    const auto dir = out_dir();
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f.precision(12);
    return f;
  }
};

Reconstruction parse_recon(const std::string& s) {
  if (s == "first-order") return Reconstruction::first_order;
  if (s == "minmod") return Reconstruction::muscl_minmod;
  if (s == "mc") return Reconstruction::muscl_mc;
  if (s == "unlimited") return Reconstruction::muscl_unlimited;
  throw std::runtime_error("unknown reconstruction " + s);
}

SpatialGrid make_grid(int nx, int ny, double box) {
  SpatialGrid g;
  g.dx = ny > 1 ? 2 : 1;
  g.nx = nx;
  g.ny = ny > 1 ? ny : 1;
  g.lx = g.ly = box;
  g.validate();
  return g;
}

void dump_fluid(const Globals& gl, const std::string& stem, int index, const FluidState& s) {
  auto f = gl.open(stem + "_" + std::to_string(index) + ".csv");
  f << "# time=" << s.time << '\n' << "x";
  if (s.grid.dx == 2) f << ",y";
  f << ",rho";
  for (int k = 0; k < s.vdim; ++k) f << ",u" << k;
  f << '\n';
  for (std::size_t i = 0; i < s.cells(); ++i) {
    f << s.grid.x(i);
    if (s.grid.dx == 2) f << ',' << s.grid.y(i);
    f << ',' << s.rho[i];
    for (int k = 0; k < s.vdim; ++k) f << ',' << s.velocity(i, k);
    f << '\n';
  }
}

void dump_soh(const Globals& gl, const std::string& stem, int index, const SOHState& s) {
  auto f = gl.open(stem + "_" + std::to_string(index) + ".csv");
  f << "# time=" << s.time << '\n' << "x";
  if (s.grid.dx == 2) f << ",y";
  f << ",rho,omega0,omega1\n";
  for (std::size_t i = 0; i < s.cells(); ++i) {
    f << s.grid.x(i);
    if (s.grid.dx == 2) f << ',' << s.grid.y(i);
    f << ',' << s.rho[i] << ',' << s.omega[2 * i] << ',' << s.omega[2 * i + 1] << '\n';
  }
}

// Initial density and velocity at (x, y) for the named profile.
void initial_flow(const std::string& ic, double x, double y, double speed, double& rho, double& ux, double& uy) {
  rho = 1.0;
  ux = speed;
  uy = 0.0;
  if (ic == "uniform") return;
  if (ic == "density-pulse") {
    const double r2 = (x - 0.5) * (x - 0.5) + (y > 0.0 ? (y - 0.5) * (y - 0.5) : 0.0);
    rho = 1.0 + 0.5 * std::exp(-r2 / (2.0 * 0.05 * 0.05));
  } else if (ic == "shear") {
    ux = speed;
    uy = 0.1 * std::sin(kTwoPi * x);
  } else if (ic == "riemann") {
    rho = x < 0.5 ? 1.0 : 0.5;
  } else if (ic == "wave") {
    rho = 1.0 + 0.2 * std::sin(kTwoPi * x);
    const double th = 0.4 * std::cos(kTwoPi * x);
    ux = speed * std::cos(th);
    uy = speed * std::sin(th);
  } else {
    throw std::runtime_error("unknown initial condition " + ic);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swarm hierarchy: particles, kinetic, hydrodynamic and limit models"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals gl;
  app.add_option("--config", gl.config, "key=value config file with [section] headers");
  app.add_option("--out", gl.out, "output directory (default: $SWARM_OUT_DIR or ./out)");
  app.add_option("--set", gl.overrides, "override a config key, e.g. --set model.diff=0.5");
  app.add_option("--seed", gl.seed, "random seed");
  auto* threads_opt = app.add_option("--threads", gl.threads, "worker threads (0 = hardware)");
  app.add_flag("--deterministic", gl.deterministic, "single-threaded reference mode");

  // coeffs
  auto* coeffs = app.add_subcommand("coeffs", "print derived coefficients as CSV");
  double coeff_alpha = -1.0;
  coeffs->add_option("--alpha", coeff_alpha, "use alpha as the free input (eps = kappa_alpha tau)");

  // particles
  auto* particles = app.add_subcommand("particles", "agent simulation");
  std::size_t p_n = 1024, p_steps = 1000, p_every = 100;
  double p_dt = 0.0, p_box = 1.0, p_speed = 0.5, p_radius = 0.0;
  int p_dx = 1, p_bins = 0;
  std::string p_csv = "particles.csv", p_cells_csv;
  particles->add_option("-n,--particles", p_n, "number of agents");
  particles->add_option("--steps", p_steps, "number of steps");
  particles->add_option("--dt", p_dt, "time step (0 = 0.1 min(tau, sigma))");
  particles->add_option("--every", p_every, "output interval in steps");
  particles->add_option("--box", p_box, "periodic box side");
  particles->add_option("--dx", p_dx, "spatial dimension (1 or 2)");
  particles->add_option("--radius", p_radius, "interaction radius before scaling (0 = model.radius)");
  particles->add_option("--speed", p_speed, "initial mean velocity in units of a");
  particles->add_option("--csv", p_csv, "time series file name");
  particles->add_option("--bins", p_bins, "cells per axis for the moment dump (0 = off)");
  particles->add_option("--cells-csv", p_cells_csv, "moment dump file name");

  // kinetic-hom
  auto* kinetic = app.add_subcommand("kinetic-hom", "spatially homogeneous kinetic relaxation");
  int k_n = 64;
  double k_vmax = 4.0, k_tend = 2.0, k_dt = 0.0, k_eps = 0.0;
  std::string k_ic = "bimaxwellian";
  bool k_implicit = false;
  kinetic->add_option("--cells", k_n, "velocity cells per axis");
  kinetic->add_option("--vmax", k_vmax, "velocity box half-width");
  kinetic->add_option("--ic", k_ic, "maxwellian | bimaxwellian | uniform-box");
  kinetic->add_option("--t-end", k_tend, "final time");
  kinetic->add_option("--dt", k_dt, "time step (0 = 0.9 explicit limit)");
  kinetic->add_option("--eps", k_eps, "include self-propulsion with collisions scaled by 1/eps");
  kinetic->add_flag("--semi-implicit", k_implicit, "implicit diffusion splitting");

  // verify-closure
  auto* closure = app.add_subcommand("verify-closure", "check closure identities");
  int c_nq = 8;
  closure->add_option("--nq", c_nq, "Gauss-Hermite points per axis");

  // euler / ns
  std::string h_ic = "density-pulse", h_recon = "mc";
  int h_nx = 256, h_ny = 1;
  double h_tend = 1.0, h_dt = 0.0, h_snap = 0.0, h_box = 1.0, h_alpha = -1.0;
  auto add_fluid_opts = [&](CLI::App* sub) {
    sub->add_option("--cells", h_nx, "cells along x");
    sub->add_option("--ny", h_ny, "cells along y (1 = quasi-1D)");
    sub->add_option("--box", h_box, "domain side");
    sub->add_option("--ic", h_ic, "uniform | density-pulse | shear | riemann | wave");
    sub->add_option("--t-end", h_tend, "final time");
    sub->add_option("--dt", h_dt, "time step (0 = automatic)");
    sub->add_option("--snapshot", h_snap, "snapshot interval (0 = final only)");
    sub->add_option("--recon", h_recon, "first-order | minmod | mc | unlimited");
  };
  auto* euler = app.add_subcommand("euler", "Euler model with relaxation source");
  add_fluid_opts(euler);
  auto* ns = app.add_subcommand("ns", "first-order corrected model");
  add_fluid_opts(ns);
  ns->add_option("--alpha", h_alpha, "use alpha as the free input (eps = kappa_alpha tau)");

  // soh
  auto* soh = app.add_subcommand("soh", "self-organised hydrodynamics");
  double s_c1 = 0.0, s_c2 = 0.0, s_delta = 0.0, s_alpha = 0.0;
  soh->add_option("--cells", h_nx, "cells along x");
  soh->add_option("--ny", h_ny, "cells along y");
  soh->add_option("--box", h_box, "domain side");
  soh->add_option("--ic", h_ic, "uniform | density-pulse | wave");
  soh->add_option("--t-end", h_tend, "final time");
  soh->add_option("--snapshot", h_snap, "snapshot interval");
  soh->add_option("--c1", s_c1, "explicit c1 (with --c2, --delta)");
  soh->add_option("--c2", s_c2, "explicit c2");
  soh->add_option("--delta", s_delta, "explicit delta");
  soh->add_option("--alpha", s_alpha, "derive speeds from the model with this alpha");

  // diffusion
  auto* diffusion = app.add_subcommand("diffusion", "diffusive limit model");
  double d_coef = 0.0, d_dt = 0.0;
  std::string d_mode = "trapezoidal";
  diffusion->add_option("--cells", h_nx, "cells along x");
  diffusion->add_option("--ny", h_ny, "cells along y");
  diffusion->add_option("--t-end", h_tend, "final time");
  diffusion->add_option("--dt", d_dt, "time step (0 = 0.2 h^2 / D)");
  diffusion->add_option("--snapshot", h_snap, "snapshot interval");
  diffusion->add_option("--d-diff", d_coef, "explicit coefficient (0 = derive from the model)");
  diffusion->add_option("--mode", d_mode, "explicit | trapezoidal");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "phase sweep and limit studies");
  std::string w_kind = "phase";
  std::vector<double> w_values;
  std::size_t w_n = 1024;
  double w_tend = 5.0, w_alpha = 0.1;
  int w_seeds = 5;
  auto* w_kind_opt = sweep->add_option("--kind", w_kind, "phase | tau | alpha | cross (default scenario.sweep)");
  sweep->add_option("--values", w_values, "T/T_c (phase), tau (tau, alpha) or eps (cross) values")
      ->delimiter(',');
  auto* w_n_opt = sweep->add_option("-n,--particles", w_n, "agents per run");
  auto* w_tend_opt = sweep->add_option("--t-end", w_tend, "run length of each particle run");
  auto* w_seeds_opt = sweep->add_option("--seeds", w_seeds, "number of seeds, starting at --seed");
  auto* w_alpha_opt = sweep->add_option("--alpha", w_alpha, "alpha for --kind alpha");

  // validate
  auto* validate = app.add_subcommand("validate", "run acceptance criteria");
  std::vector<int> v_ids;
  validate->add_option("ids", v_ids, "criterion numbers (default all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*coeffs) {
      const auto p = gl.model();
      const auto c = coeff_alpha >= 0.0 ? derive_with_alpha(p, coeff_alpha) : derive(p);
      std::cout.precision(15);
      std::cout << "name,value,valid\n";
      for (const auto& r : coefficient_table(c)) std::cout << r.name << ',' << r.value << ',' << (r.valid ? 1 : 0) << '\n';
      return 0;
    }

    if (*particles) {
      auto m = gl.model();
      if (p_radius > 0.0) m.radius = p_radius;
      const auto p = particle_params(m);
      if (!(p.radius < 0.5 * p_box))
        throw std::invalid_argument("interaction radius " + std::to_string(p.radius) + " must be below half the box");
      auto st = uniform_particles(p_n, p_box, p_dx, m.dim, gl.seed, {p_speed * m.a}, std::sqrt(m.temperature()));
      auto ts = gl.open(p_csv);
      ts << "time,phi,mean_speed\n";
      std::ofstream cells;
      SpatialGrid bins;
      if (p_bins > 0) {
        bins = make_grid(p_bins, p_dx == 2 ? p_bins : 1, p_box);
        cells = gl.open(p_cells_csv.empty() ? "particles_cells.csv" : p_cells_csv);
        cells << "time,cell,rho";
        for (int k = 0; k < m.dim; ++k) cells << ",u" << k;
        cells << '\n';
      }
      ParticleRunOptions o;
      o.dt = p_dt > 0.0 ? p_dt : 0.1 * std::min(p.tau, p.sigma);
      o.steps = p_steps;
      o.output_every = p_every;
      o.step.threads = gl.thread_count();
      o.observer = [&](const ParticleState& s) {
        ts << s.time << ',' << order_parameter(s) << ',';
        double sp = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) sp += s.speed(i);
        ts << sp / s.size() << '\n';
        if (p_bins > 0) {
          const auto r = observables(s, bins);
          for (std::size_t c = 0; c < bins.cells(); ++c) {
            cells << s.time << ',' << c << ',' << r.binned_density[c];
            for (int k = 0; k < s.vdim; ++k)
              cells << ',' << (r.binned_velocity[c] ? std::to_string((*r.binned_velocity[c])[k]) : std::string("nan"));
            cells << '\n';
          }
        }
      };
      run_particles(st, p, o);
      return 0;
    }

    if (*kinetic) {
      const auto p = gl.model();
      VelocityGrid g{k_vmax, k_n, p.dim};
      DistributionFunction f;
      if (k_ic == "maxwellian") {
        f = sample_maxwellian(g, 1.0, {0.3, 0.0, 0.0}, p.temperature());
      } else if (k_ic == "bimaxwellian") {
        f = sample_maxwellian(g, 0.7, {0.6, -0.2, 0.0}, p.temperature());
        const auto f2 = sample_maxwellian(g, 0.3, {-0.8, 0.4, 0.0}, 0.6 * p.temperature());
        for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += f2.values[i];
      } else if (k_ic == "uniform-box") {
        f = sample_uniform_box(g, 1.0, 1.0);
      } else {
        throw std::runtime_error("unknown initial condition " + k_ic);
      }
      const double scale = k_eps > 0.0 ? 1.0 / k_eps : 1.0;
      const double h = g.spacing();
      double dt = k_dt;
      if (dt <= 0.0) {
        const double diff = p.diff * scale;
        dt = 0.9 * std::min(diff > 0.0 ? h * h / (2.0 * p.dim * diff) : 1e300, p.sigma / scale * h / (2.0 * g.v_max));
        if (k_eps > 0.0) dt = std::min(dt, 0.9 * h / (p.dim * detail::max_propulsion_speed(g, p.a, p.tau)));
      }
      auto out = gl.open("kinetic.csv");
      out << "time,mass,mom0,mom1,mom2,mean_speed,free_energy\n";
      RelaxOptions opt;
      opt.mode = k_implicit ? RelaxMode::semi_implicit : RelaxMode::explicit_euler;
      auto row = [&](double t, const DistributionFunction& d) {
        const auto m = d.momentum();
        out << t << ',' << d.mass() << ',' << m[0] << ',' << m[1] << ',' << m[2] << ',' << d.mean_speed() << ','
            << free_energy(d, p.temperature()) << '\n';
      };
      row(0.0, f);
      opt.observer = row;
      if (k_eps > 0.0)
        relax_with_propulsion(f, p, k_eps, k_tend, dt, opt);
      else
        relax(f, p, k_tend, dt, opt);
      return 0;
    }

    if (*closure) {
      const auto p = gl.model();
      CheckReport rep;
      const auto set = make_closure_functions(p.temperature(), p.sigma, p.dim);
      rep.append(check_solvability(set, c_nq));
      const double t = p.temperature();
      VelocityGrid grid{6.0 * std::sqrt(t), p.dim == 3 ? 97 : 129, p.dim};
      rep.append(check_pseudo_inverse(set, grid));
      if (p.dim >= 2) {
        LocalFlow flow{1.2, std::vector<double>(p.dim, 0.2), std::vector<double>(p.dim * p.dim, 0.1),
                       std::vector<double>(p.dim, 0.3)};
        flow.grad_u[1] = -0.2;
        rep.append(check_b1_b3(p, flow, std::max(c_nq, 4)));
      }
      rep.append(check_kernel_expansion(normalized_kernel_moment(1), PeriodicField::trig(1.0, 0.1, 1),
                                        PeriodicField::trig(0.5, 0.2, 2, 0.3), 0.1));
      auto out = gl.open("closure.csv");
      out << "identity,residual,tolerance,pass\n";
      std::cout << "identity,residual,tolerance,pass\n";
      for (const auto& r : rep.rows) {
        out << r.name << ',' << r.residual << ',' << r.tolerance << ',' << (r.passed ? 1 : 0) << '\n';
        std::cout << r.name << ',' << r.residual << ',' << r.tolerance << ',' << (r.passed ? 1 : 0) << '\n';
      }
      return rep.passed() ? 0 : 1;
    }

    if (*euler || *ns) {
      const bool is_ns = static_cast<bool>(*ns);
      const auto p = gl.model();
      const auto c = is_ns && h_alpha >= 0.0 ? derive_with_alpha(p, h_alpha) : derive(p);
      const auto g = make_grid(h_nx, h_ny, h_box);
      FluidState s(g, p.dim);
      const double speed = c.comfort_speed ? *c.comfort_speed : 0.0;
      for (std::size_t i = 0; i < s.cells(); ++i) {
        double rho, ux, uy;
        initial_flow(h_ic, g.x(i) / h_box, g.dx == 2 ? g.y(i) / h_box : -1.0, speed, rho, ux, uy);
        std::vector<double> u(p.dim, 0.0);
        u[0] = ux;
        if (p.dim > 1) u[1] = uy;
        s.set(i, rho, u);
      }
      HydroRunOptions o;
      o.dt = h_dt;
      o.snapshot_every = h_snap;
      o.step.recon = parse_recon(h_recon);
      o.step.threads = gl.thread_count();
      int index = 0;
      const std::string stem = is_ns ? "ns" : "euler";
      o.observer = [&](const FluidState& st) { dump_fluid(gl, stem, index++, st); };
      integrate(s, c, is_ns ? HydroSolver::navier_stokes : HydroSolver::euler, h_tend, o);
      return 0;
    }

    if (*soh) {
      SOHSpeeds sp;
      if (s_c1 > 0.0) {
        sp = {s_c1, s_c2 > 0.0 ? s_c2 : s_c1, s_delta};
      } else {
        const auto p = gl.model();
        sp = soh_speeds(s_alpha > 0.0 ? derive_with_alpha(p, s_alpha) : derive(p));
      }
      const auto g = make_grid(h_nx, h_ny, h_box);
      SOHState s(g, sp);
      for (std::size_t i = 0; i < s.cells(); ++i) {
        double rho, ux, uy;
        initial_flow(h_ic == "density-pulse" || h_ic == "wave" || h_ic == "uniform" ? h_ic : "uniform",
                     g.x(i) / h_box, g.dx == 2 ? g.y(i) / h_box : -1.0, 1.0, rho, ux, uy);
        s.set(i, rho, std::atan2(uy, ux));
      }
      SOHRunOptions o;
      o.snapshot_every = h_snap;
      o.step.threads = gl.thread_count();
      int index = 0;
      o.observer = [&](const SOHState& st) { dump_soh(gl, "soh", index++, st); };
      soh_integrate(s, h_tend, o);
      return 0;
    }

    if (*diffusion) {
      double dc = d_coef;
      if (dc <= 0.0) {
        const auto c = derive(gl.model());
        if (!c.d_diff) throw RegimeError("diffusion model needs T > T_c");
        dc = *c.d_diff;
      }
      const auto g = make_grid(h_nx, h_ny, 1.0);
      DiffusionState s{g, {}, dc, 0.0};
      for (std::size_t i = 0; i < g.cells(); ++i)
        s.rho.push_back(periodic_heat_pulse(g.x(i), 0.0, dc, 0.5, 0.05, 0.2, 1.0));
      const auto mode = d_mode == "explicit" ? DiffusionMode::explicit_euler : DiffusionMode::trapezoidal;
      const double h = g.min_spacing();
      const double dt = d_dt > 0.0 ? d_dt : 0.2 * h * h / dc;
      int index = 0;
      auto dump = [&](const DiffusionResult& r) {
        auto f = gl.open("diffusion_" + std::to_string(index++) + ".csv");
        f << "# time=" << r.state.time << "\nx,rho,velocity\n";
        for (std::size_t i = 0; i < g.cells(); ++i)
          f << g.x(i) << ',' << r.state.rho[i] << ',' << r.velocity[i * g.dx] << '\n';
      };
      dump({s, diffusion_velocity(s)});
      double next = h_snap > 0.0 ? h_snap : h_tend;
      while (s.time < h_tend - 1e-12) {
        auto r = diffusion_step(s, std::min(dt, h_tend - s.time), mode);
        s = r.state;
        if (s.time >= next - 1e-12 || s.time >= h_tend - 1e-12) {
          dump(r);
          next += h_snap > 0.0 ? h_snap : h_tend;
        }
      }
      return 0;
    }

    if (*sweep) {
      const auto cfg = gl.load();
      const auto m = load_model_params(cfg);
      std::vector<std::uint64_t> seeds;
      for (int k = 0; k < w_seeds; ++k) seeds.push_back(gl.seed + k);
      // a [scenario] section supplies whatever the command line leaves out
      if (cfg.has("scenario.sweep") || cfg.has("scenario.values")) {
        const auto sc = ScenarioConfig::from_config(cfg);
        if (!w_kind_opt->count() && !sc.sweep_name.empty()) w_kind = sc.sweep_name;
        if (w_values.empty()) w_values = sc.sweep_values;
        if (!w_n_opt->count()) w_n = sc.particles;
        if (!w_tend_opt->count() && cfg.has("scenario.t_end")) w_tend = sc.t_end;
        if (!w_seeds_opt->count() && cfg.has("scenario.seeds")) seeds = sc.seeds;
        if (!w_alpha_opt->count() && cfg.has("scenario.alpha")) w_alpha = sc.alpha;
        if (!threads_opt->count() && cfg.has("scenario.threads")) gl.threads = sc.threads;
        if (gl.out.empty() && !std::getenv("SWARM_OUT_DIR") && cfg.has("scenario.out_dir")) gl.out = sc.out_dir;
      }
      RunReport rep;
      rep.config_hash = cfg.hash();
      if (w_kind == "phase" || w_kind == "cross") rep.seeds = seeds;
      if (w_kind == "phase") {
        PhaseSweepSettings s;
        if (!w_values.empty()) s.temp_ratios = w_values;
        s.seeds = seeds;
        s.particles = w_n;
        s.t_end = w_tend;
        s.threads = gl.thread_count();
        const auto r = phase_sweep(m, s);
        auto hash = rep.config_hash;
        rep = phase_report("phase", r, seeds);
        rep.config_hash = hash;
      } else if (w_kind == "tau") {
        rep.scenario = "tau_limit";
        const auto r = limit_study_tau(m, w_values.empty() ? std::vector<double>{0.1, 0.01, 0.001} : w_values);
        if (r.diffusive) {
          auto& t = rep.table("distances", {"tau", "rho_distance"});
          for (const auto& row : r.rows) t.add_numbers({row.tau, row.rho_distance});
        } else {
          auto& t = rep.table("distances", {"tau", "rho_distance", "omega_distance", "max_speed_gap", "norm_defect"});
          for (const auto& row : r.rows)
            t.add_numbers({row.tau, row.rho_distance, row.omega_distance, row.max_speed_gap, row.norm_defect});
        }
        rep.note("branch", r.diffusive ? "diffusive" : "ordered");
        rep.note("decreasing", r.decreasing ? "1" : "0");
      } else if (w_kind == "alpha") {
        rep.scenario = "alpha_limit";
        const auto r = limit_study_alpha(m, w_alpha, w_values.empty() ? std::vector<double>{0.01, 0.001} : w_values);
        auto& t = rep.table("distances", {"tau", "eps", "rho_distance", "omega_distance"});
        for (const auto& row : r.rows) t.add_numbers({row.tau, row.eps, row.rho_distance, row.omega_distance});
        rep.note("c1", r.speeds.c1);
        rep.note("c2", r.speeds.c2);
        rep.note("density_speed", r.density_speed);
        rep.note("transverse_speed", r.transverse_speed);
        rep.note("speed_ratio", r.speed_ratio());
      } else if (w_kind == "cross") {
        rep.scenario = "particles_vs_euler";
        CrossValidationSettings s;
        if (!w_values.empty()) s.eps = w_values;
        s.seeds = seeds;
        s.particles = w_n;
        s.threads = gl.thread_count();
        auto& t = rep.table("distances", {"eps", "particles", "rho_distance", "u_distance"});
        for (const auto& row : cross_validate_particles_euler(m, s))
          t.add_numbers({row.eps, static_cast<double>(row.particles), row.rho_distance, row.u_distance});
      } else {
        throw std::runtime_error("unknown sweep kind " + w_kind);
      }
      return emit_outputs(rep, gl.out_dir());
    }

    if (*validate) {
      acceptance::Settings s;
      s.threads = gl.thread_count();
      RunReport rep;
      rep.scenario = "acceptance";
      rep.config_hash = gl.load().hash();
      if (v_ids.empty())
        for (const auto& [id, fn] : acceptance::all_criteria()) v_ids.push_back(id);
      for (int id : v_ids) {
        const auto r = acceptance::run_criterion(id, s);
        std::cout << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.name << "): " << r.measured
                  << std::endl;
        rep.criteria.push_back(r);
      }
      return emit_outputs(rep, gl.out_dir());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
