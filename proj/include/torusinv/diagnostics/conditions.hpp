#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusinv/inference.hpp"

namespace torusinv::diagnostics {

using spectral::SpectralField;

/// One checked condition. `direction` states how measured compares with
/// threshold when the condition holds: "<=", "<" or ">".
struct ConditionReport {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  std::string direction = "<=";
  bool satisfied = false;
  nlohmann::json context = nlohmann::json::object();
};

inline bool compare(double measured, const std::string& direction, double threshold) {
  if (direction == "<=") return measured <= threshold;
  if (direction == "<") return measured < threshold;
  if (direction == ">") return measured > threshold;
  throw ConfigError("unknown condition direction '" + direction + "'");
}

inline ConditionReport make_report(std::string name, double measured, std::string direction,
                                   double threshold, nlohmann::json context = nlohmann::json::object()) {
  ConditionReport r{std::move(name), measured, threshold, std::move(direction), false, std::move(context)};
  r.satisfied = compare(r.measured, r.direction, r.threshold);
  return r;
}

inline nlohmann::json to_json(const ConditionReport& r) {
  return {{"name", r.name},           {"measured", r.measured},   {"threshold", r.threshold},
          {"direction", r.direction}, {"satisfied", r.satisfied}, {"context", r.context}};
}

/// Default smallness constant C = 1 / log N.
inline double default_constant(double n) {
  if (!(n > 1.0)) throw ConfigError("the default constant 1/log N needs N > 1");
  return 1.0 / std::log(n);
}

inline const ConditionReport* find_report(const std::vector<ConditionReport>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return &r;
  return nullptr;
}

/// NV, NM1, NM2.1 and NM2.2 for true variances sigma2 and proxies s2.
/// NM1 uses the configured floor s0^2 when given, else min s_i^2.
/// NM2.2 compares delta_noise = max |1 - sigma_i^2/s_i^2| with C delta_N^2.
inline std::vector<ConditionReport> check_noise_condition(const std::vector<double>& sigma2,
                                                          const std::vector<double>& s2, double n,
                                                          double delta_n, double floor = 0.0,
                                                          double c_noise = 0.0) {
  if (sigma2.size() != s2.size() || sigma2.empty())
    throw PreconditionError("check_noise_condition: variance lists must be non-empty and equal length");
  for (std::size_t i = 0; i < s2.size(); ++i)
    if (!(sigma2[i] > 0.0) || !(s2[i] > 0.0))
      throw PreconditionError("check_noise_condition: nonpositive variance at record " + std::to_string(i));
  if (c_noise <= 0.0) c_noise = default_constant(n);

  const auto [smin, smax] = std::minmax_element(sigma2.begin(), sigma2.end());
  const double s0 = floor > 0.0 ? floor : *std::min_element(s2.begin(), s2.end());
  double inv_mean = 0.0, ratio_max = 0.0, dnoise = 0.0;
  for (std::size_t i = 0; i < s2.size(); ++i) {
    inv_mean += 1.0 / s2[i];
    ratio_max = std::max(ratio_max, sigma2[i] / s2[i]);
    dnoise = std::max(dnoise, std::abs(1.0 - sigma2[i] / s2[i]));
  }
  inv_mean /= double(s2.size());
  const nlohmann::json ctx = {{"N", n}, {"delta_N", delta_n}, {"records", s2.size()},
                              {"C_noise", c_noise}, {"s0_2", s0}};
  std::vector<ConditionReport> out;
  out.push_back(make_report("NV", *smin, ">", 0.0, {{"sigma0_2", *smin}, {"sigma_inf_2", *smax}}));
  out.push_back(make_report("NM1", inv_mean, "<=", 1.0 / s0, ctx));
  out.push_back(make_report("NM2.1", ratio_max, "<=", 1.0, ctx));
  out.push_back(make_report("NM2.2", dnoise, "<=", c_noise * delta_n * delta_n, ctx));
  return out;
}

/// NM2 holds when either branch does.
inline bool nm2_satisfied(const std::vector<ConditionReport>& rs) {
  const auto* a = find_report(rs, "NM2.1");
  const auto* b = find_report(rs, "NM2.2");
  return (a && a->satisfied) || (b && b->satisfied);
}

/// Largest |u - v| over the stored space-time grid of u; v is interpolated to
/// u's times when the grids differ.
inline double sup_grid_distance(const forward::Trajectory& u, const forward::Trajectory& v) {
  if (u.resolution() != v.resolution() || u.components() != v.components() || u.dim() != v.dim())
    throw PreconditionError("sup_grid_distance: trajectories have different shapes");
  const bool same = u.times == v.times;
  double best = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const auto b = same ? v.states[n] : forward::interpolate_state(v, u.times[n]);
    const auto diff = spectral::to_physical(u.states[n] - b);
    for (double x : diff.values) best = std::max(best, std::abs(x));
  }
  return best;
}

inline double model_gap(const inference::PdeForward& exact, const inference::PdeForward& proxy,
                        const SpectralField& theta) {
  return sup_grid_distance(exact.solve(theta), proxy.solve(theta));
}

struct ModelProbeSet {
  std::vector<SpectralField> directions;  // unit R-norm
  double beta = 0.0;
  spectral::SobolevFlavor flavor = spectral::SobolevFlavor::inhomogeneous;
};

/// Prior draws normalized to unit H^beta norm. The same directions serve every
/// radius, so probe sets for different M differ only by scaling.
inline ModelProbeSet model_probes(const priors::PriorBasis& basis, int n_probe, std::uint64_t seed,
                                  double beta, spectral::SobolevFlavor flavor) {
  if (n_probe < 1) throw ConfigError("model condition needs at least one probe");
  ModelProbeSet p{{}, beta, flavor};
  for (int i = 0; i < n_probe; ++i) {
    auto th = priors::sample_prior(basis, derive_key(seed, "model-probe", {std::uint64_t(i)}));
    const double r = spectral::sobolev_norm(th, beta, flavor);
    if (!(r > 0.0)) continue;
    p.directions.push_back(th * (1.0 / r));
  }
  return p;
}

/// MM2 at a ladder of radii M_1 < M_2 < ...: each probe direction is scaled
/// onto the sphere of every radius, and the report for M_k takes the maximum
/// over all probes at radii <= M_k (nested probe sets, so measured is
/// monotone in M). Failed probe solves are skipped and tallied.
inline std::vector<ConditionReport> check_model_condition(const inference::PdeForward& exact,
                                                          const inference::PdeForward& proxy,
                                                          const ModelProbeSet& probes,
                                                          const std::vector<double>& radii, double n,
                                                          double delta_n, double c_model = 0.0) {
  if (radii.empty()) throw ConfigError("model condition needs at least one radius");
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (!(radii[k] > 0.0) || (k > 0 && radii[k] <= radii[k - 1]))
      throw ConfigError("model condition radii must be positive and strictly increasing");
  if (c_model <= 0.0) c_model = default_constant(n);
  const double threshold = c_model * delta_n * delta_n;
  std::vector<ConditionReport> out;
  double running = 0.0;
  int failures = 0, evaluated = 0;
  for (double m : radii) {
    for (const auto& dir : probes.directions) {
      try {
        running = std::max(running, model_gap(exact, proxy, dir * m));
        ++evaluated;
      } catch (const SolverDivergence&) {
        ++failures;
      } catch (const NumericError&) {
        ++failures;
      } catch (const ConvergenceError&) {
        ++failures;
      }
    }
    out.push_back(make_report("MM2", running, "<=", threshold,
                              {{"radius", m},
                               {"probes", probes.directions.size()},
                               {"evaluated", evaluated},
                               {"failures", failures},
                               {"beta", probes.beta},
                               {"N", n},
                               {"delta_N", delta_n},
                               {"C_model", c_model},
                               {"exact", exact.name()},
                               {"proxy", proxy.name()}}));
  }
  return out;
}

inline ConditionReport check_model_condition(const inference::PdeForward& exact,
                                             const inference::PdeForward& proxy,
                                             const priors::PriorBasis& basis, double radius,
                                             int n_probe, std::uint64_t seed, double n, double delta_n,
                                             double beta, spectral::SobolevFlavor flavor,
                                             double c_model = 0.0) {
  const auto probes = model_probes(basis, n_probe, seed, beta, flavor);
  return check_model_condition(exact, proxy, probes, {radius}, n, delta_n, c_model).front();
}

}  // namespace torusinv::diagnostics
