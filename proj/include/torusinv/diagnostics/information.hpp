#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "torusinv/diagnostics/conditions.hpp"

namespace torusinv::diagnostics {

/// Inputs for the information-inequality check. Data follow the exact map
/// with true variances sigma2; the surrogate uses proxy map and variances s2
/// (one entry per record, N = s2.size()). model_sup is the measured
/// sup ||G(theta0) - G~(theta0)||_inf that bounds the model-error term.
struct GapSetup {
  const inference::ForwardMap* exact = nullptr;
  const inference::ForwardMap* proxy = nullptr;
  observation::DesignSpec design;
  observation::NoiseKind noise = observation::NoiseKind::gaussian;
  std::vector<double> sigma2;
  std::vector<double> s2;
  double model_sup = 0.0;
  int mc_draws = 20000;
  int quadrature = 10000;
  std::uint64_t seed = 0;
  double delta_n = 0.0;  // ball radius for d_G~; 0 disables the check
  double sup_bound = std::numeric_limits<double>::infinity();  // U
};

struct InformationGap {
  double lhs = 0.0;
  double lhs_se = 0.0;
  double bound = 0.0;
  double d = 0.0;
  double d_se = 0.0;
  double quadratic_term = 0.0;
  double model_term = 0.0;
  /// 1/2 sum_i s_i^{-2} d_G~^2: the exact value of lhs when well specified.
  double well_specified_value = 0.0;
  double well_specified_se = 0.0;
  bool in_ball = true;
  bool holds = false;
};

/// Monte-Carlo estimate of -E_{theta0}[log(q_theta/q_theta0)] over fresh
/// designs, records and noise, against the bound
/// 1/2 N s0^{-2} d^2 + s0^{-2} model_sup N d with d = d_G~(theta, theta0).
inline InformationGap information_gap(const SpectralField& theta, const SpectralField& theta0,
                                      const GapSetup& g) {
  if (!g.exact || !g.proxy) throw ConfigError("information_gap needs exact and proxy maps");
  const std::size_t n = g.s2.size();
  if (n == 0 || g.sigma2.size() != n) throw PreconditionError("information_gap: variance list sizes");
  if (g.mc_draws < 2) throw ConfigError("information_gap needs at least two draws");
  const int vd = g.exact->value_dim();

  const auto pts = observation::draw_design(g.design, std::size_t(g.mc_draws), derive_key(g.seed, "gap-design"));
  const auto truth = g.exact->predict(theta0, pts);
  const auto p0 = g.proxy->predict(theta0, pts);
  const auto p1 = g.proxy->predict(theta, pts);
  observation::NoiseModel noise;
  noise.kind = g.noise;
  double s = 0.0, ss = 0.0;
  for (std::size_t m = 0; m < pts.size(); ++m) {
    const auto key = derive_key(g.seed, "gap", {m});
    const auto i = std::min(n - 1, std::size_t(uniform_at(key, 0) * double(n)));
    double a = 0.0, b = 0.0;
    for (int c = 0; c < vd; ++c) {
      const double y = truth[m][c] + noise.draw(g.sigma2[i], derive_key(key, "noise"), c);
      a += (y - p1[m][c]) * (y - p1[m][c]);
      b += (y - p0[m][c]) * (y - p0[m][c]);
    }
    const double h = 0.5 * (a - b) / g.s2[i];
    s += h;
    ss += h * h;
  }
  const double draws = double(pts.size());
  const double mean = s / draws;
  const double var = std::max(0.0, (ss - draws * mean * mean) / (draws - 1.0));

  InformationGap out;
  out.lhs = double(n) * mean;
  out.lhs_se = double(n) * std::sqrt(var / draws);
  const auto fd = inference::forward_distance(*g.proxy, theta, theta0, g.design, g.quadrature, g.seed);
  out.d = fd.d();
  out.d_se = out.d > 0.0 ? fd.se / (2.0 * out.d) : 0.0;
  double s0 = std::numeric_limits<double>::infinity(), inv_sum = 0.0;
  for (double v : g.s2) {
    s0 = std::min(s0, v);
    inv_sum += 1.0 / v;
  }
  out.quadratic_term = 0.5 * double(n) / s0 * fd.d2;
  out.model_term = double(n) / s0 * g.model_sup * out.d;
  out.bound = out.quadratic_term + out.model_term;
  out.well_specified_value = 0.5 * inv_sum * fd.d2;
  out.well_specified_se = 0.5 * inv_sum * fd.se;
  if (g.delta_n > 0.0) {
    double sup = 0.0;
    for (const auto& v : p1)
      for (int c = 0; c < vd; ++c) sup = std::max(sup, std::abs(v[c]));
    out.in_ball = out.d <= g.delta_n && sup <= g.sup_bound;
  }
  out.holds = out.lhs <= out.bound + 3.0 * out.lhs_se;
  return out;
}

}  // namespace torusinv::diagnostics
