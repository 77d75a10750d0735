#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "torusinv/core/errors.hpp"

namespace torusinv::forward {

/// Reaction term f in du/dt = Laplace u + f(u). The smooth bump
///   f(u) = a u exp(1 / ((u/b)^2 - 1))  for |u| < b, 0 otherwise
/// is compactly supported, C-infinity, and vanishes at u = 0.
struct ReactionTerm {
  enum class Kind { zero, smooth_bump };

  Kind kind = Kind::zero;
  double amplitude = 1.0;
  double half_width = 10.0;

  static ReactionTerm zero() { return {}; }
  static ReactionTerm bump(double a = 1.0, double b = 10.0) {
    if (!(b > 0.0)) throw ConfigError("reaction half_width must be positive");
    return {Kind::smooth_bump, a, b};
  }

  bool is_zero() const noexcept { return kind == Kind::zero || amplitude == 0.0; }

  double operator()(double u) const noexcept {
    if (kind == Kind::zero) return 0.0;
    const double r = u / half_width;
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    return amplitude * u * std::exp(1.0 / (r2 - 1.0));
  }

  double derivative(double u) const noexcept {
    if (kind == Kind::zero) return 0.0;
    const double r = u / half_width;
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    const double g = std::exp(1.0 / (r2 - 1.0));
    // d/du [u g(u)] = g + u g', g' = g * (-2 r / b) / (r^2 - 1)^2
    const double dg = g * (-2.0 * r / half_width) / ((r2 - 1.0) * (r2 - 1.0));
    return amplitude * (g + u * dg);
  }

  /// Half-width of the support (0 for the zero term).
  double support() const noexcept { return kind == Kind::zero ? 0.0 : half_width; }
};

inline std::string to_string(ReactionTerm::Kind k) {
  return k == ReactionTerm::Kind::zero ? "zero" : "smooth_bump";
}

/// sup|f| over the support, by dense sampling.
inline double sup_norm(const ReactionTerm& f, int samples = 20001) {
  double worst = 0.0;
  const double b = f.support();
  for (int i = 0; i < samples; ++i) {
    const double u = -b + 2.0 * b * i / (samples - 1);
    worst = std::max(worst, std::abs(f(u)));
  }
  return worst;
}

/// ||f - g||_{C^1} = sup|f - g| + sup|f' - g'|, by dense sampling.
inline double c1_distance(const ReactionTerm& f, const ReactionTerm& g, int samples = 20001) {
  const double b = std::max(f.support(), g.support());
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double u = -b + 2.0 * b * i / (samples - 1);
    s0 = std::max(s0, std::abs(f(u) - g(u)));
    s1 = std::max(s1, std::abs(f.derivative(u) - g.derivative(u)));
  }
  return s0 + s1;
}

}  // namespace torusinv::forward
