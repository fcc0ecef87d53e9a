#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/coeffs.hpp"
#include "swarm/errors.hpp"
#include "swarm/parallel.hpp"
#include "swarm/spatial_grid.hpp"

namespace swarm {

// Agent-level coefficients. With eps > 0 the model parameters are read as
// the O(1) scaled constants and converted back to the unscaled SDE:
// sigma -> eps sigma, D -> D / eps, R -> eps R. With eps == 0 they are used
// as given.
struct ParticleParams {
  double a = 1.0;
  double tau = 1.0;
  double sigma = 1.0;
  double diff = 0.0;
  double radius = 0.1;
};

inline ParticleParams particle_params(const ModelParams& p) {
  p.validate();
  if (p.eps > 0.0) return {p.a, p.tau, p.eps * p.sigma, p.diff / p.eps, p.eps * p.radius};
  return {p.a, p.tau, p.sigma, p.diff, p.radius};
}

struct ParticleState {
  double box = 1.0;
  int dx = 2;
  int vdim = 2;
  std::vector<double> positions;   // particle-major, dx per particle
  std::vector<double> velocities;  // particle-major, vdim per particle
  double time = 0.0;
  std::uint64_t rng_seed = 0;
  std::uint64_t steps = 0;
  std::vector<std::mt19937_64> streams;

  std::size_t size() const { return positions.size() / static_cast<std::size_t>(dx); }
  double pos(std::size_t i, int k) const { return positions[i * dx + k]; }
  double vel(std::size_t i, int k) const { return velocities[i * vdim + k]; }
  double speed(std::size_t i) const {
    double s = 0.0;
    for (int k = 0; k < vdim; ++k) s += vel(i, k) * vel(i, k);
    return std::sqrt(s);
  }

  void validate() const {
    if (dx != 1 && dx != 2) throw std::invalid_argument("particle spatial dimension must be 1 or 2");
    if (vdim < dx || vdim > 3) throw std::invalid_argument("velocity dimension must satisfy dx <= d <= 3");
    if (!(box > 0.0) || !std::isfinite(box)) throw std::invalid_argument("box side must be positive");
    if (positions.empty() || positions.size() % dx) throw std::invalid_argument("need at least one particle");
    if (velocities.size() != size() * vdim) throw std::invalid_argument("positions and velocities disagree on N");
  }

  // One engine per particle, seeded from (rng_seed, index).
  void seed_streams() {
    streams.clear();
    streams.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
      std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32),
                        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
      streams.emplace_back(seq);
    }
  }
};

// Uniform positions; velocities mean_velocity + N(0, thermal_std^2) per
// component.
inline ParticleState uniform_particles(std::size_t n, double box, int dx, int vdim, std::uint64_t seed,
                                       const std::vector<double>& mean_velocity, double thermal_std) {
  ParticleState s;
  s.box = box;
  s.dx = dx;
  s.vdim = vdim;
  s.rng_seed = seed;
  s.positions.resize(n * dx);
  s.velocities.resize(n * vdim);
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> where(0.0, box);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < dx; ++k) s.positions[i * dx + k] = where(gen);
    for (int k = 0; k < vdim; ++k) {
      const double m = k < static_cast<int>(mean_velocity.size()) ? mean_velocity[k] : 0.0;
      s.velocities[i * vdim + k] = m + thermal_std * noise(gen);
    }
  }
  s.validate();
  s.seed_streams();
  return s;
}

namespace detail {

// Valid for |d| < box, which holds for wrapped positions.
inline double minimum_image(double d, double box) {
  if (d > 0.5 * box) return d - box;
  if (d < -0.5 * box) return d + box;
  return d;
}

inline bool within(const ParticleState& s, std::size_t i, std::size_t j, double radius) {
  double r2 = 0.0;
  for (int k = 0; k < s.dx; ++k) {
    const double d = minimum_image(s.pos(j, k) - s.pos(i, k), s.box);
    r2 += d * d;
  }
  return r2 <= radius * radius;
}

inline void check_radius(const ParticleState& s, double radius) {
  if (!(radius > 0.0) || !(radius < 0.5 * s.box))
    throw std::invalid_argument("interaction radius " + std::to_string(radius) + " must lie in (0, L/2) with L = " +
                                std::to_string(s.box));
}

// Accumulates v_j over in-range j, visiting candidates in ascending order so
// every search path produces the same floating point sum.
template <class Range>
void accumulate_mean(const ParticleState& s, std::size_t i, double radius, const Range& candidates, double* out) {
  std::fill(out, out + s.vdim, 0.0);
  std::size_t count = 0;
  for (std::size_t j : candidates) {
    if (!within(s, i, j, radius)) continue;
    for (int k = 0; k < s.vdim; ++k) out[k] += s.vel(j, k);
    ++count;
  }
  for (int k = 0; k < s.vdim; ++k) out[k] /= static_cast<double>(count);
}

}  // namespace detail

// All-pairs mean velocity of particles within radius of i (i included).
inline std::vector<double> neighbor_mean_velocity_all_pairs(const ParticleState& s, std::size_t i, double radius) {
  detail::check_radius(s, radius);
  struct Iota {
    std::size_t n;
    struct It {
      std::size_t v;
      std::size_t operator*() const { return v; }
      It& operator++() { return ++v, *this; }
      bool operator!=(const It& o) const { return v != o.v; }
    };
    It begin() const { return {0}; }
    It end() const { return {n}; }
  };
  std::vector<double> out(s.vdim);
  detail::accumulate_mean(s, i, radius, Iota{s.size()}, out.data());
  return out;
}

// Uniform cell list over the periodic box with cell side >= radius.
class CellList {
 public:
  CellList(const ParticleState& s, double radius) : dx_(s.dx) {
    detail::check_radius(s, radius);
    per_axis_ = std::max(1, static_cast<int>(std::floor(s.box / radius)));
    const std::size_t ncell = dx_ == 2 ? std::size_t(per_axis_) * per_axis_ : per_axis_;
    start_.assign(ncell + 1, 0);
    cell_of_.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::size_t c = axis_cell(s.pos(i, 0), s.box);
      if (dx_ == 2) c += std::size_t(per_axis_) * axis_cell(s.pos(i, 1), s.box);
      cell_of_[i] = c;
      ++start_[c + 1];
    }
    for (std::size_t c = 0; c < ncell; ++c) start_[c + 1] += start_[c];
    members_.resize(s.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < s.size(); ++i) members_[fill[cell_of_[i]]++] = i;

    hood_.resize(ncell);
    const int span = std::min(per_axis_, 3);
    std::vector<std::size_t> near;
    for (std::size_t c = 0; c < ncell; ++c) {
      if (start_[c] == start_[c + 1]) continue;
      const int cx = static_cast<int>(c % per_axis_), cy = static_cast<int>(c / per_axis_);
      near.clear();
      for (int oy = 0; oy < (dx_ == 2 ? span : 1); ++oy)
        for (int ox = 0; ox < span; ++ox) {
          const int ix = (cx + ox - 1 + per_axis_) % per_axis_;
          const int iy = dx_ == 2 ? (cy + oy - 1 + per_axis_) % per_axis_ : 0;
          near.push_back(std::size_t(iy) * per_axis_ + ix);
        }
      std::sort(near.begin(), near.end());
      near.erase(std::unique(near.begin(), near.end()), near.end());
      auto& h = hood_[c];
      for (std::size_t cell : near) h.insert(h.end(), members_.begin() + start_[cell], members_.begin() + start_[cell + 1]);
      std::sort(h.begin(), h.end());
    }
  }

  // Indices from the cells adjacent to i's cell, sorted ascending.
  const std::vector<std::size_t>& candidates(std::size_t i) const { return hood_[cell_of_[i]]; }

 private:
  std::size_t axis_cell(double x, double box) const {
    const int k = static_cast<int>(x / box * per_axis_);
    return static_cast<std::size_t>(std::clamp(k, 0, per_axis_ - 1));
  }

  int dx_;
  int per_axis_;
  std::vector<std::size_t> start_, members_, cell_of_;
  std::vector<std::vector<std::size_t>> hood_;
};

inline std::vector<double> neighbor_mean_velocity(const ParticleState& s, std::size_t i, double radius) {
  const CellList cells(s, radius);
  std::vector<double> out(s.vdim);
  detail::accumulate_mean(s, i, radius, cells.candidates(i), out.data());
  return out;
}

// Mean velocities of every particle, cell list above the all-pairs cutoff.
inline std::vector<double> neighbor_means(const ParticleState& s, double radius, int threads = 1,
                                          std::size_t all_pairs_below = 0) {
  detail::check_radius(s, radius);
  const std::size_t n = s.size();
  std::vector<double> out(n * s.vdim);
  if (n < all_pairs_below) {
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const auto m = neighbor_mean_velocity_all_pairs(s, i, radius);
        std::copy(m.begin(), m.end(), out.begin() + i * s.vdim);
      }
    });
    return out;
  }
  const CellList cells(s, radius);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) detail::accumulate_mean(s, i, radius, cells.candidates(i), out.data() + i * s.vdim);
  });
  return out;
}

struct ParticleStepOptions {
  int threads = 1;
  std::size_t all_pairs_below = 0;
};

// Euler-Maruyama step of the alignment / self-propulsion SDE.
inline void particle_step(ParticleState& s, const ParticleParams& p, double dt, const ParticleStepOptions& opt = {}) {
  s.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double guard = 0.1 * std::min(p.tau, p.sigma);
  if (dt > guard)
    throw StabilityError("dt = " + std::to_string(dt) + " exceeds 0.1 min(tau, sigma) = " + std::to_string(guard));
  if (s.streams.size() != s.size()) s.seed_streams();

  const std::size_t n = s.size();
  const int vd = s.vdim;
  const auto mean = neighbor_means(s, p.radius, opt.threads, opt.all_pairs_below);
  const double inv_tau = std::isinf(p.tau) ? 0.0 : 1.0 / p.tau;
  const double kick = std::sqrt(2.0 * p.diff * dt);
  std::vector<double> v_new(s.velocities.size());

  parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double q = s.speed(i) * s.speed(i);
      const double prop = inv_tau * (1.0 - q / (p.a * p.a));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int k = 0; k < vd; ++k) {
        const double v = s.vel(i, k);
        double dv = dt * ((mean[i * vd + k] - v) / p.sigma + prop * v);
        if (kick > 0.0) dv += kick * gauss(s.streams[i]);
        v_new[i * vd + k] = v + dv;
      }
    }
  });

  std::size_t worst = 0;
  double vmax = 0.0;
  bool bad = false;
  for (std::size_t i = 0; i < n; ++i) {
    double q = 0.0;
    for (int k = 0; k < vd; ++k) q += v_new[i * vd + k] * v_new[i * vd + k];
    if (!std::isfinite(q)) {
      bad = true;
      worst = i;
      vmax = std::numeric_limits<double>::infinity();
      break;
    }
    if (q > vmax * vmax) vmax = std::sqrt(q), worst = i;
  }
  if (bad || vmax > 1e150)
    throw StabilityError("particle velocity blew up: max |v| = " + std::to_string(vmax) + " at particle " +
                         std::to_string(worst));

  s.velocities = std::move(v_new);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < s.dx; ++k) {
      double& x = s.positions[i * s.dx + k];
      x = std::fmod(x + dt * s.vel(i, k), s.box);
      if (x < 0.0) x += s.box;
      if (x >= s.box) x = 0.0;
    }
  s.time += dt;
  ++s.steps;
}

struct ObservableRecord {
  double time = 0.0;
  double order_parameter = 0.0;
  double mean_speed = 0.0;
  std::vector<double> mean_velocity;
  std::vector<std::size_t> counts;
  std::vector<double> binned_density;
  std::vector<std::optional<std::vector<double>>> binned_velocity;
};

// |sum v| / sum |v|; zero when every particle is at rest.
inline double order_parameter(const ParticleState& s) {
  std::vector<double> total(s.vdim, 0.0);
  double speeds = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int k = 0; k < s.vdim; ++k) total[k] += s.vel(i, k);
    speeds += s.speed(i);
  }
  if (speeds == 0.0) return 0.0;
  double m = 0.0;
  for (double t : total) m += t * t;
  return std::min(1.0, std::sqrt(m) / speeds);
}

inline ObservableRecord observables(const ParticleState& s, const SpatialGrid& g) {
  s.validate();
  if (g.dx != s.dx) throw std::invalid_argument("grid and particle spatial dimensions differ");
  const double tol = 1e-12 * s.box;
  if (std::abs(g.lx - s.box) > tol || (g.dx == 2 && std::abs(g.ly - s.box) > tol))
    throw std::invalid_argument("binning grid must cover the particle box exactly");

  ObservableRecord r;
  r.time = s.time;
  r.order_parameter = order_parameter(s);
  const std::size_t n = s.size();
  r.mean_velocity.assign(s.vdim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    r.mean_speed += s.speed(i);
    for (int k = 0; k < s.vdim; ++k) r.mean_velocity[k] += s.vel(i, k);
  }
  r.mean_speed /= static_cast<double>(n);
  for (double& m : r.mean_velocity) m /= static_cast<double>(n);

  const std::size_t cells = g.cells();
  r.counts.assign(cells, 0);
  std::vector<double> vsum(cells * s.vdim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = std::min<std::size_t>(g.nx - 1, static_cast<std::size_t>(s.pos(i, 0) / g.spacing(0)));
    if (g.dx == 2) c += std::size_t(g.nx) * std::min<std::size_t>(g.ny - 1, static_cast<std::size_t>(s.pos(i, 1) / g.spacing(1)));
    ++r.counts[c];
    for (int k = 0; k < s.vdim; ++k) vsum[c * s.vdim + k] += s.vel(i, k);
  }
  r.binned_density.resize(cells);
  r.binned_velocity.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    r.binned_density[c] = static_cast<double>(r.counts[c]) / g.cell_volume();
    if (r.counts[c] == 0) continue;
    std::vector<double> u(vsum.begin() + c * s.vdim, vsum.begin() + (c + 1) * s.vdim);
    for (double& x : u) x /= static_cast<double>(r.counts[c]);
    r.binned_velocity[c] = std::move(u);
  }
  return r;
}

struct ParticleRunOptions {
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::size_t output_every = 100;
  ParticleStepOptions step;
  std::function<void(const ParticleState&)> observer;
};

// Advances `steps` steps; the observer sees the initial state, every
// output_every-th step and the final state.
inline void run_particles(ParticleState& s, const ParticleParams& p, const ParticleRunOptions& opt) {
  if (opt.observer) opt.observer(s);
  for (std::size_t k = 1; k <= opt.steps; ++k) {
    particle_step(s, p, opt.dt, opt.step);
    if (opt.observer && ((opt.output_every && k % opt.output_every == 0) || k == opt.steps)) opt.observer(s);
  }
}

}  // namespace swarm
