#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "torusinv/spectral.hpp"

namespace torusinv::forward::detail {

using spectral::SpectralField;

/// Uniform grid of `steps` intervals covering [0, T] with spacing <= dt.
struct TimeGrid {
  int steps = 0;
  double h = 0.0;
  double horizon = 0.0;
  double time(int n) const { return n == steps ? horizon : n * h; }
};

inline TimeGrid make_grid(double horizon, double dt) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
  if (!(dt > 0.0) || dt > horizon * (1.0 + 1e-12))
    throw PreconditionError("time step must satisfy 0 < dt <= T");
  const int steps = std::max(1, static_cast<int>(std::ceil(horizon / dt - 1e-9)));
  return {steps, horizon / steps, horizon};
}

/// exp(-rate * lambda_k * h) per lattice offset, lambda_k = 4 pi^2 |k|^2.
inline std::vector<double> decay_factors(const SpectralField& shape, double rate, double h) {
  std::vector<double> e(shape.lattice_size());
  for (std::size_t o = 0; o < e.size(); ++o) {
    const auto k = shape.wavevector(o);
    const long n2 = long(k[0]) * k[0] + long(k[1]) * k[1];
    e[o] = std::exp(-rate * spectral::laplace_eigenvalue(n2) * h);
  }
  return e;
}

inline void apply_decay(SpectralField& u, std::span<const double> decay) {
  for (int c = 0; c < u.components(); ++c) {
    auto comp = u.component(c);
    for (std::size_t o = 0; o < comp.size(); ++o) comp[o] *= decay[o];
  }
}

/// One integrating-factor Heun step for u' = -L u + N(t, u):
///   u* = E (u + h a),  u <- E (u + h/2 a) + h/2 N(t + h, u*),  a = N(t, u).
template <class Rhs>
void lawson_heun_step(SpectralField& u, double t, double h, std::span<const double> decay,
                      const SpectralField& a, Rhs&& rhs) {
  SpectralField stage = u;
  stage.axpy(h, a);
  apply_decay(stage, decay);
  const SpectralField b = rhs(t + h, stage);
  u.axpy(0.5 * h, a);
  apply_decay(u, decay);
  u.axpy(0.5 * h, b);
}

inline bool should_store(int n, int steps, int store_every) {
  return n == steps || n % store_every == 0;
}

}  // namespace torusinv::forward::detail
