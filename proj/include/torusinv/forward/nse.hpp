#pragma once

#include <map>
#include <optional>

#include "torusinv/forward/integrator.hpp"
#include "torusinv/forward/rde.hpp"
#include "torusinv/forward/trajectory.hpp"

namespace torusinv::forward {

/// Viscosity, time-independent forcing, and horizon of the projected
/// Navier-Stokes system. An empty forcing field means f = 0.
struct NseParams {
  double viscosity = 1.0;
  SpectralField forcing;
  double horizon = 1.0;
};

/// Throws PreconditionError unless u is a real, zero-mean, divergence-free
/// 2-component field on T^2.
inline void require_solenoidal(const SpectralField& u, const char* what) {
  if (u.empty() || u.dim() != 2 || u.components() != 2)
    throw PreconditionError(std::string(what) + " must be a 2-component field on T^2");
  spectral::require_finite(u, what);
  require_real(u, what);
  const double scale = std::max(1.0, spectral::l2_norm(u));
  if (spectral::max_divergence(u) > 1e-10 * scale)
    throw PreconditionError(std::string(what) + " is not divergence-free");
  if (std::abs(u({0, 0}, 0)) + std::abs(u({0, 0}, 1)) > 1e-12 * scale)
    throw PreconditionError(std::string(what) + " does not have zero mean");
}

inline void validate(const NseParams& p, const SpectralField& theta) {
  if (!(p.viscosity > 0.0) || !std::isfinite(p.viscosity))
    throw ConfigError("viscosity must be positive");
  require_solenoidal(theta, "theta");
  if (!p.forcing.empty()) {
    theta.require_shape(p.forcing);
    require_solenoidal(p.forcing, "forcing");
  }
}

namespace detail {

inline double max_speed(const spectral::PhysicalField& w) {
  double s = 0.0;
  const auto w0 = w.component(0), w1 = w.component(1);
  for (std::size_t i = 0; i < w0.size(); ++i) s = std::max(s, std::hypot(w0[i], w1[i]));
  return s;
}

/// P[(w . grad) u], dealiased, with w given on the grid.
inline SpectralField advection(const spectral::PhysicalField& w, const SpectralField& u) {
  const auto dx = spectral::to_physical(spectral::derivative(u, 0));
  const auto dy = spectral::to_physical(spectral::derivative(u, 1));
  spectral::PhysicalField prod(2, u.resolution(), 2);
  const auto w0 = w.component(0), w1 = w.component(1);
  for (int c = 0; c < 2; ++c) {
    auto p = prod.component(c);
    const auto ax = dx.component(c), ay = dy.component(c);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = w0[i] * ax[i] + w1[i] * ay[i];
  }
  auto out = spectral::to_spectral(prod);
  spectral::dealias_inplace(out);
  return spectral::leray_project(out);
}

/// Substeps so that h_sub * M * max|w| <= 0.5.
inline int cfl_substeps(double h, int resolution, double speed, const char* solver, double t) {
  if (!std::isfinite(speed)) throw SolverDivergence(solver, t);
  const double n = std::ceil(h * resolution * speed / 0.5 - 1e-12);
  if (n > 1e5) throw SolverDivergence(solver, t);
  return std::max(1, static_cast<int>(n));
}

/// Shared driver: integrates du/dt = -nu A u + f - P[(w(t) . grad) u] where
/// the advecting field is produced by `velocity(t, u)` on the grid.
template <class Velocity>
Trajectory integrate_advective(const SpectralField& theta, const NseParams& p, double dt,
                               int store_every, const char* name, Velocity&& velocity,
                               int band) {
  if (store_every < 1) throw ConfigError("store_every must be >= 1");
  const auto grid = make_grid(p.horizon, dt);
  std::map<int, std::vector<double>> decays;
  const auto decay_for = [&](int nsub) -> const std::vector<double>& {
    auto it = decays.find(nsub);
    if (it == decays.end())
      it = decays.emplace(nsub, decay_factors(theta, p.viscosity, grid.h / nsub)).first;
    return it->second;
  };
  const auto rhs_with = [&](const std::optional<spectral::PhysicalField>& w,
                            const SpectralField& u) {
    SpectralField out = p.forcing.empty() ? SpectralField(2, u.resolution(), 2) : p.forcing;
    if (w) out.axpy(-1.0, advection(*w, u));
    return out;
  };
  const auto rhs = [&](double t, const SpectralField& u) { return rhs_with(velocity(t, u), u); };

  Trajectory traj;
  traj.solver = name;
  traj.dt = grid.h;
  traj.store_every = store_every;
  traj.band = band;
  SpectralField u = theta;
  traj.push(0.0, u);
  for (int n = 0; n < grid.steps; ++n) {
    const double t0 = grid.time(n);
    auto w = velocity(t0, u);
    const int nsub =
        w ? cfl_substeps(grid.h, u.resolution(), max_speed(*w), name, t0) : 1;
    const double hs = grid.h / nsub;
    const auto& decay = decay_for(nsub);
    for (int s = 0; s < nsub; ++s) {
      const double ts = t0 + s * hs;
      if (s > 0) w = velocity(ts, u);
      const SpectralField a = rhs_with(w, u);
      lawson_heun_step(u, ts, hs, decay, a, rhs);
    }
    if (!u.all_finite()) throw SolverDivergence(name, grid.time(n + 1));
    if (should_store(n + 1, grid.steps, store_every)) traj.push(grid.time(n + 1), u);
  }
  return traj;
}

inline int advective_band(const SpectralField& theta, const NseParams& p) {
  int band = std::max(spectral::spectral_band(theta), spectral::dealias_cutoff(theta.resolution()));
  if (!p.forcing.empty()) band = std::max(band, spectral::spectral_band(p.forcing));
  return band;
}

}  // namespace detail

/// du/dt + nu A u + P[(u . grad) u] = f, u(0) = theta, on T^2.
inline Trajectory solve_nse(const SpectralField& theta, const NseParams& p, double dt,
                            int store_every = 1) {
  validate(p, theta);
  const auto velocity = [](double, const SpectralField& u) {
    return std::optional<spectral::PhysicalField>(spectral::to_physical(u));
  };
  return detail::integrate_advective(theta, p, dt, store_every, "solve_nse", velocity,
                                     detail::advective_band(theta, p));
}

/// Step-doubling estimate of the NSE time-discretisation error:
/// sup_t ||u_dt - u_{dt/2}||_{H-dot^2}.
inline double nse_time_error(const SpectralField& theta, const NseParams& p, double dt) {
  const auto coarse = solve_nse(theta, p, dt);
  const auto fine = solve_nse(theta, p, 0.5 * coarse.dt, 2);
  return sup_hdot2_distance(coarse, fine);
}

/// Iterates u^0 ... u^L and the gaps sup_t ||u^l - u^{l-1}||_{H-dot^2}, l = 1..L.
struct OseenResult {
  std::vector<Trajectory> iterates;
  int iterations = 0;
  std::vector<double> successive_gaps;

  const Trajectory& final() const { return iterates.back(); }
};

/// Stopping rule: a fixed number of iterations, or iterate until the gap
/// falls below `tolerance` (at most `max_iterations`).
struct OseenOptions {
  int iterations = 0;
  double tolerance = 0.0;
  int max_iterations = 50;
  int store_every = 1;
  /// Keep only u^{L-1} and u^L instead of every iterate.
  bool keep_all = true;
};

/// One Oseen sweep: du/dt + nu A u + P[(w(t) . grad) u] = f, u(0) = theta,
/// with w read from `previous` at the stage times.
inline Trajectory oseen_step(const SpectralField& theta, const NseParams& p, double dt,
                             const Trajectory& previous, int store_every = 1) {
  bool zero = true;
  for (const auto& s : previous.states)
    for (const auto& z : s.data())
      if (z != spectral::Complex{0.0, 0.0}) zero = false;
  const auto velocity = [&](double t, const SpectralField&) -> std::optional<spectral::PhysicalField> {
    if (zero) return std::nullopt;
    return spectral::to_physical(interpolate_state(previous, t));
  };
  int band = detail::advective_band(theta, p);
  if (zero) {
    band = spectral::spectral_band(theta);
    if (!p.forcing.empty()) band = std::max(band, spectral::spectral_band(p.forcing));
  }
  return detail::integrate_advective(theta, p, dt, store_every, "oseen", velocity, band);
}

/// Zero trajectory on the solver's time grid (the default initializer).
inline Trajectory zero_trajectory(const SpectralField& shape, double horizon, double dt) {
  const auto grid = detail::make_grid(horizon, dt);
  Trajectory z;
  z.solver = "zero";
  z.dt = grid.h;
  z.band = 0;
  for (int n = 0; n <= grid.steps; ++n)
    z.push(grid.time(n), SpectralField(shape.dim(), shape.resolution(), shape.components()));
  return z;
}

inline OseenResult oseen_solve(const SpectralField& theta, const NseParams& p, double dt,
                               const OseenOptions& opt,
                               std::optional<Trajectory> initializer = std::nullopt) {
  validate(p, theta);
  const bool fixed = opt.iterations > 0;
  if (fixed == (opt.tolerance > 0.0))
    throw ConfigError("oseen_solve needs exactly one of iterations > 0 or tolerance > 0");
  if (!fixed && opt.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (initializer) {
    if (initializer->states.empty()) throw PreconditionError("empty Oseen initializer");
    theta.require_shape(initializer->states.front());
    if (initializer->horizon() < p.horizon * (1.0 - 1e-12))
      throw PreconditionError("Oseen initializer does not cover the horizon");
  }
  OseenResult r;
  r.iterates.push_back(initializer ? std::move(*initializer)
                                   : zero_trajectory(theta, p.horizon, dt));
  const int cap = fixed ? opt.iterations : opt.max_iterations;
  for (int l = 1; l <= cap; ++l) {
    Trajectory next = oseen_step(theta, p, dt, r.iterates.back(), opt.store_every);
    const double gap = sup_hdot2_distance(next, r.iterates.back());
    if (!std::isfinite(gap)) throw SolverDivergence("oseen", p.horizon);
    r.successive_gaps.push_back(gap);
    r.iterations = l;
    if (!opt.keep_all && r.iterates.size() == 2) r.iterates.erase(r.iterates.begin());
    r.iterates.push_back(std::move(next));
    if (!fixed && gap <= opt.tolerance) return r;
  }
  if (!fixed)
    throw ConvergenceError("oseen_solve: gap above tolerance after " +
                               std::to_string(cap) + " iterations",
                           r.successive_gaps);
  return r;
}

/// sup_t ||u^{nu1,f1}(t) - u^{nu2,f2}(t)||_{H-dot^2} on the shared grid.
inline double stability_gap_nse(const SpectralField& theta, const NseParams& a,
                                const NseParams& b, double dt) {
  if (std::abs(a.horizon - b.horizon) > 1e-12 * std::max(1.0, a.horizon))
    throw PreconditionError("stability_gap_nse needs equal horizons");
  return sup_hdot2_distance(solve_nse(theta, a, dt), solve_nse(theta, b, dt));
}

}  // namespace torusinv::forward
