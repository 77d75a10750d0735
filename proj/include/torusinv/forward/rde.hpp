#pragma once

#include "torusinv/forward/integrator.hpp"
#include "torusinv/forward/reaction.hpp"
#include "torusinv/forward/trajectory.hpp"

namespace torusinv::forward {

/// Relative Hermitian-symmetry tolerance for inputs declared real.
inline void require_real(const SpectralField& u, const char* what) {
  double scale = 0.0;
  for (const auto& z : u.data()) scale = std::max(scale, std::abs(z));
  if (spectral::hermitian_defect(u) > 1e-10 * std::max(1.0, scale))
    throw PreconditionError(std::string(what) + " is not real-valued (Hermitian symmetry fails)");
}

/// du/dt = Laplace u + f(u) on T^d, periodic, from u(0) = theta.
inline Trajectory solve_rde(const SpectralField& theta, const ReactionTerm& f, double horizon,
                            double dt, int store_every = 1) {
  if (theta.empty() || theta.components() != 1)
    throw PreconditionError("solve_rde needs a scalar field");
  if (store_every < 1) throw ConfigError("store_every must be >= 1");
  spectral::require_finite(theta, "solve_rde");
  require_real(theta, "theta");
  const auto grid = detail::make_grid(horizon, dt);
  const auto decay = detail::decay_factors(theta, 1.0, grid.h);

  const auto rhs = [&](double, const SpectralField& u) {
    if (f.is_zero()) return SpectralField(u.dim(), u.resolution(), 1);
    auto phys = spectral::to_physical(u);
    for (auto& v : phys.values) v = f(v);
    auto out = spectral::to_spectral(phys);
    spectral::dealias_inplace(out);
    return out;
  };

  Trajectory traj;
  traj.solver = "rde";
  traj.dt = grid.h;
  traj.store_every = store_every;
  traj.band = f.is_zero() ? spectral::spectral_band(theta)
                          : std::max(spectral::spectral_band(theta),
                                     spectral::dealias_cutoff(theta.resolution()));
  SpectralField u = theta;
  traj.push(0.0, u);
  for (int n = 0; n < grid.steps; ++n) {
    const double t = grid.time(n);
    const SpectralField a = rhs(t, u);
    detail::lawson_heun_step(u, t, grid.h, decay, a, rhs);
    if (!u.all_finite()) throw SolverDivergence("solve_rde", grid.time(n + 1));
    if (detail::should_store(n + 1, grid.steps, store_every)) traj.push(grid.time(n + 1), u);
  }
  return traj;
}

}  // namespace torusinv::forward
