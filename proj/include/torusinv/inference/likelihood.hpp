#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "torusinv/inference/forward_map.hpp"
#include "torusinv/observation.hpp"

namespace torusinv::inference {

/// Solver failure during a likelihood evaluation, carrying the offending theta.
class ForwardFailure : public SolverDivergence {
 public:
  ForwardFailure(const SolverDivergence& cause, SpectralField theta)
      : SolverDivergence("likelihood", cause.time()),
        theta_(std::move(theta)) {}
  const SpectralField& theta() const noexcept { return theta_; }

 private:
  SpectralField theta_;
};

/// -1/2 sum_i v_i^{-1} ||y_i - F_i||^2, summed in record order.
inline double log_likelihood(const observation::Dataset& ds, const std::vector<Prediction>& pred,
                             const std::vector<double>& variances) {
  if (pred.size() != ds.size() || variances.size() != ds.size())
    throw PreconditionError("log_likelihood: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double r2 = 0.0;
    for (int c = 0; c < ds.value_dim; ++c) {
      const double r = ds.records[i].y[c] - pred[i][c];
      r2 += r * r;
    }
    total += r2 / variances[i];
  }
  return -0.5 * total;
}

/// Exact or surrogate log-likelihood theta -> l(theta): a forward map
/// (G or G~) paired with per-record variances (sigma_i^2 or s_i^2).
class Likelihood {
 public:
  Likelihood(const observation::Dataset& ds, std::shared_ptr<const ForwardMap> fwd,
             std::vector<double> variances, double floor = 0.0)
      : ds_(&ds), fwd_(std::move(fwd)), variances_(std::move(variances)),
        points_(ds.design_points()) {
    if (!fwd_) throw ConfigError("likelihood needs a forward map");
    if (variances_.size() != ds.size())
      throw ConfigError("likelihood needs one variance per record");
    for (double v : variances_)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("variances must be positive");
    if (floor > 0.0 && *std::min_element(variances_.begin(), variances_.end()) < floor)
      throw ConfigError("variance below the configured floor s0^2");
    if (fwd_->value_dim() != ds.value_dim)
      throw ConfigError("forward map value dimension does not match the data");
  }

  double operator()(const SpectralField& theta) const {
    return log_likelihood(*ds_, predict(theta), variances_);
  }

  std::vector<Prediction> predict(const SpectralField& theta) const {
    try {
      return fwd_->predict(theta, points_);
    } catch (const ForwardFailure&) {
      throw;
    } catch (const SolverDivergence& e) {
      throw ForwardFailure(e, theta);
    }
  }

  const observation::Dataset& dataset() const noexcept { return *ds_; }
  const ForwardMap& forward() const noexcept { return *fwd_; }
  std::shared_ptr<const ForwardMap> forward_ptr() const noexcept { return fwd_; }
  const std::vector<double>& variances() const noexcept { return variances_; }
  const std::vector<DesignPoint>& points() const noexcept { return points_; }

 private:
  const observation::Dataset* ds_;
  std::shared_ptr<const ForwardMap> fwd_;
  std::vector<double> variances_;
  std::vector<DesignPoint> points_;
};

/// Squared design-law distance E_zeta ||G(a)(Z) - G(b)(Z)||^2 by Monte Carlo
/// over `draws` design points, with its standard error.
struct ForwardDistance {
  double d2 = 0.0;
  double se = 0.0;
  double d() const { return std::sqrt(d2); }
};

inline ForwardDistance forward_distance(const std::vector<Prediction>& a,
                                        const std::vector<Prediction>& b, int value_dim) {
  const std::size_t n = a.size();
  if (n == 0 || b.size() != n) throw PreconditionError("forward_distance: size mismatch");
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (int c = 0; c < value_dim; ++c) v += (a[i][c] - b[i][c]) * (a[i][c] - b[i][c]);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double var = n > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

inline ForwardDistance forward_distance(const ForwardMap& fwd, const SpectralField& a,
                                        const SpectralField& b,
                                        const observation::DesignSpec& design, int draws,
                                        std::uint64_t seed) {
  const auto pts = observation::draw_design(design, static_cast<std::size_t>(draws),
                                            derive_key(seed, "quadrature"));
  return forward_distance(fwd.predict(a, pts), fwd.predict(b, pts), fwd.value_dim());
}

}  // namespace torusinv::inference
