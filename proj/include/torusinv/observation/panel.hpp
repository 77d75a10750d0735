#pragma once

#include <cmath>
#include <vector>

#include "torusinv/observation/dataset.hpp"

namespace torusinv::observation {

/// Repeated observations Upsilon_{ij} at L_X sensors over L_T window times
/// in [0, Delta T]; values[i][j] is time i, sensor j.
struct AuxiliaryPanel {
  std::vector<std::array<double, 2>> sensors;
  std::vector<double> times;
  std::vector<std::vector<std::array<double, 2>>> values;
  int value_dim = 1;
};

/// Panel at equispaced window times 0, Delta T/(L_T - 1), ..., Delta T, with
/// per-sensor noise variances. Uses a PRNG stream disjoint from datasets.
inline AuxiliaryPanel generate_panel(const forward::Trajectory& traj,
                                     const std::vector<std::array<double, 2>>& sensors,
                                     double window, int window_points,
                                     const std::vector<double>& sensor_sigma2, NoiseKind kind,
                                     std::uint64_t seed) {
  if (window_points < 2) throw ConfigError("panel needs L_T >= 2");
  if (sensors.empty()) throw ConfigError("panel needs at least one sensor");
  if (sensor_sigma2.size() != sensors.size())
    throw ConfigError("panel needs one variance per sensor");
  if (!(window > 0.0) || window > traj.horizon() * (1.0 + 1e-12))
    throw PreconditionError("panel window must satisfy 0 < Delta T <= T");
  NoiseModel noise;
  noise.kind = kind;
  AuxiliaryPanel p;
  p.sensors = sensors;
  p.value_dim = traj.components();
  for (int i = 0; i < window_points; ++i) p.times.push_back(window * i / (window_points - 1));
  p.values.assign(p.times.size(), std::vector<std::array<double, 2>>(sensors.size()));
  for (std::size_t j = 0; j < sensors.size(); ++j) {
    for (std::size_t i = 0; i < p.times.size(); ++i) {
      const auto u = forward::evaluate_forward(traj, p.times[i], sensors[j]);
      const auto key = derive_key(seed, "panel", {i, j});
      for (int c = 0; c < p.value_dim; ++c)
        p.values[i][j][c] = u[c] + noise.draw(sensor_sigma2[j], key, c);
    }
  }
  return p;
}

/// Per-sensor sample variances s_j^2 (divisor L_T - 1, components pooled)
/// and, when a trajectory is supplied, the window bias
/// b_T = max_i |u(t_i, x_j) - u(0, x_j)| per sensor.
struct VarianceProxy {
  std::vector<double> s2;
  std::vector<double> window_bias;
};

inline VarianceProxy variance_proxy(const AuxiliaryPanel& panel,
                                    const forward::Trajectory* traj = nullptr) {
  const std::size_t lt = panel.values.size();
  if (lt < 2) throw ConfigError("variance proxy needs L_T >= 2");
  VarianceProxy out;
  const std::size_t lx = panel.values.front().size();
  for (std::size_t j = 0; j < lx; ++j) {
    double total = 0.0;
    for (int c = 0; c < panel.value_dim; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < lt; ++i) mean += panel.values[i][j][c];
      mean /= static_cast<double>(lt);
      double ss = 0.0;
      for (std::size_t i = 0; i < lt; ++i) {
        const double r = panel.values[i][j][c] - mean;
        ss += r * r;
      }
      total += ss / static_cast<double>(lt - 1);
    }
    out.s2.push_back(total / panel.value_dim);
  }
  if (traj) {
    for (std::size_t j = 0; j < lx; ++j) {
      const auto u0 = forward::evaluate_forward(*traj, 0.0, panel.sensors[j]);
      double b = 0.0;
      for (double t : panel.times) {
        const auto u = forward::evaluate_forward(*traj, t, panel.sensors[j]);
        for (int c = 0; c < panel.value_dim; ++c) b = std::max(b, std::abs(u[c] - u0[c]));
      }
      out.window_bias.push_back(b);
    }
  }
  return out;
}

/// Upward-biased proxy s^2 (1 + k sqrt(2/(L_T - 1))): k standard errors of a
/// Gaussian sample variance above the estimate. k = 0 leaves s^2 unchanged.
inline std::vector<double> inflate_proxy(std::vector<double> s2, int window_points, double k) {
  if (window_points < 2) throw ConfigError("inflate_proxy needs L_T >= 2");
  const double f = 1.0 + k * std::sqrt(2.0 / (window_points - 1));
  for (auto& v : s2) v *= f;
  return s2;
}

/// s_i^2 = s_{sensor(i)}^2 for every record.
inline std::vector<double> proxy_assignment(const Dataset& ds, const std::vector<double>& sensor_s2) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int s = ds.records[i].sensor;
    if (s < 0 || static_cast<std::size_t>(s) >= sensor_s2.size())
      throw PreconditionError("record " + std::to_string(i) + " has no sensor estimate (sensor " +
                              std::to_string(s) + ")");
    out.push_back(sensor_s2[static_cast<std::size_t>(s)]);
  }
  return out;
}

}  // namespace torusinv::observation
