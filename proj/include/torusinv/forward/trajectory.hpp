#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "torusinv/core/design.hpp"
#include "torusinv/spectral.hpp"

namespace torusinv::forward {

using spectral::SpectralField;

/// Stored solution u(t) on a strictly increasing time grid starting at 0.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::string solver;
  double dt = 0.0;
  int store_every = 1;
  /// Largest |k_i| that can carry content in any state (bounds point sums).
  int band = -1;

  std::size_t size() const noexcept { return times.size(); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  int dim() const { return states.front().dim(); }
  int resolution() const { return states.front().resolution(); }
  int components() const { return states.front().components(); }

  void push(double t, SpectralField u) {
    times.push_back(t);
    states.push_back(std::move(u));
  }
};

/// Lagrange weights on (up to) four consecutive snapshots surrounding t.
/// Returns the first stencil index and one weight per stencil node. On a
/// stored time the weights are exactly one-hot.
struct TimeStencil {
  std::size_t first = 0;
  std::vector<double> weights;
};

inline double clamp_time(const Trajectory& traj, double t) {
  if (traj.times.empty()) throw PreconditionError("empty trajectory");
  const double T = traj.horizon();
  const double slack = 1e-12 * std::max(1.0, T);
  if (!(t >= -slack && t <= T + slack))
    throw PreconditionError("time " + std::to_string(t) + " outside trajectory horizon [0, " +
                            std::to_string(T) + "]");
  return std::clamp(t, 0.0, T);
}

inline TimeStencil time_stencil(const Trajectory& traj, double t) {
  t = clamp_time(traj, t);
  const auto& ts = traj.times;
  const std::size_t n = ts.size();
  TimeStencil s;
  if (n == 1) {
    s.weights = {1.0};
    return s;
  }
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
  i = std::min(i, n - 2);
  const std::size_t width = std::min<std::size_t>(4, n);
  const std::size_t lo = i == 0 ? 0 : i - 1;
  s.first = std::min(lo, n - width);
  s.weights.assign(width, 1.0);
  for (std::size_t a = 0; a < width; ++a) {
    const double ta = ts[s.first + a];
    for (std::size_t b = 0; b < width; ++b) {
      if (a == b) continue;
      const double tb = ts[s.first + b];
      s.weights[a] *= (t - tb) / (ta - tb);
    }
  }
  return s;
}

/// u(t) by cubic interpolation in time.
inline SpectralField interpolate_state(const Trajectory& traj, double t) {
  const auto s = time_stencil(traj, t);
  SpectralField out(traj.dim(), traj.resolution(), traj.components());
  for (std::size_t a = 0; a < s.weights.size(); ++a)
    if (s.weights[a] != 0.0) out.axpy(s.weights[a], traj.states[s.first + a]);
  return out;
}

/// G(theta)(t, x): exact spectral sum in space, cubic in time.
inline std::array<double, 2> evaluate_forward(const Trajectory& traj, double t,
                                              const std::array<double, 2>& x) {
  const auto s = time_stencil(traj, t);
  std::array<double, 2> out{0.0, 0.0};
  for (std::size_t a = 0; a < s.weights.size(); ++a) {
    if (s.weights[a] == 0.0) continue;
    const auto v = spectral::evaluate_point(traj.states[s.first + a], x, traj.band);
    out[0] += s.weights[a] * v[0];
    out[1] += s.weights[a] * v[1];
  }
  return out;
}

/// Batched evaluation. Points sharing a location (fixed sensors) reuse a
/// per-snapshot time series when that is cheaper than direct sums.
inline std::vector<std::array<double, 2>> evaluate_forward(const Trajectory& traj,
                                                           std::span<const DesignPoint> points) {
  std::vector<std::array<double, 2>> out(points.size());
  std::map<std::pair<double, double>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < points.size(); ++i)
    groups[{points[i].x[0], points[i].x[1]}].push_back(i);
  const std::size_t snaps = traj.size();
  for (const auto& [loc, idx] : groups) {
    const std::array<double, 2> x{loc.first, loc.second};
    if (idx.size() * 4 <= snaps) {
      for (std::size_t i : idx) out[i] = evaluate_forward(traj, points[i].t, x);
      continue;
    }
    std::vector<std::array<double, 2>> series(snaps);
    for (std::size_t s = 0; s < snaps; ++s)
      series[s] = spectral::evaluate_point(traj.states[s], x, traj.band);
    for (std::size_t i : idx) {
      const auto st = time_stencil(traj, points[i].t);
      std::array<double, 2> v{0.0, 0.0};
      for (std::size_t a = 0; a < st.weights.size(); ++a) {
        v[0] += st.weights[a] * series[st.first + a][0];
        v[1] += st.weights[a] * series[st.first + a][1];
      }
      out[i] = v;
    }
  }
  return out;
}

/// sup_t ||a(t) - b(t)||_{H-dot^2} over the time grid of a (b interpolated
/// where grids differ).
inline double sup_hdot2_distance(const Trajectory& a, const Trajectory& b) {
  if (a.states.empty() || b.states.empty()) throw PreconditionError("empty trajectory");
  a.states.front().require_shape(b.states.front());
  const double tol = 1e-12 * std::max(1.0, a.horizon());
  bool shared = a.size() == b.size();
  for (std::size_t i = 0; shared && i < a.size(); ++i)
    shared = std::abs(a.times[i] - b.times[i]) <= tol;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const SpectralField diff =
        a.states[i] - (shared ? b.states[i] : interpolate_state(b, a.times[i]));
    worst = std::max(worst, spectral::hdot2_norm(diff));
  }
  return worst;
}

/// Thinned copy keeping every n-th snapshot and the final one.
inline Trajectory thin(const Trajectory& traj, int store_every) {
  if (store_every < 1) throw ConfigError("store_every must be >= 1");
  if (store_every == 1) return traj;
  Trajectory out;
  out.solver = traj.solver;
  out.dt = traj.dt;
  out.band = traj.band;
  out.store_every = traj.store_every * store_every;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (i % static_cast<std::size_t>(store_every) == 0 || i + 1 == traj.size())
      out.push(traj.times[i], traj.states[i]);
  return out;
}

static_assert(std::endian::native == std::endian::little,
              "trajectory files are written as little-endian float64");

/// One JSON header line, then per snapshot the lattice coefficients
/// (component-major, storage order) as interleaved re/im float64.
inline void write_trajectory(const std::string& path, const Trajectory& traj, int store_every = 1) {
  const Trajectory t = thin(traj, store_every);
  if (t.states.empty()) throw PreconditionError("empty trajectory");
  nlohmann::json h;
  h["format"] = "torusinv-trajectory";
  h["version"] = 1;
  h["solver"] = t.solver;
  h["dt"] = t.dt;
  h["store_every"] = t.store_every;
  h["band"] = t.band;
  h["dim"] = t.dim();
  h["resolution"] = t.resolution();
  h["components"] = t.components();
  h["times"] = t.times;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << h.dump() << '\n';
  for (const auto& s : t.states)
    out.write(reinterpret_cast<const char*>(s.data().data()),
              static_cast<std::streamsize>(s.data().size() * sizeof(spectral::Complex)));
  if (!out) throw ConfigError("write failed: " + path);
}

inline Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  const auto h = nlohmann::json::parse(line);
  if (h.value("format", "") != "torusinv-trajectory")
    throw ConfigError(path + ": not a trajectory file");
  Trajectory t;
  t.solver = h.at("solver").get<std::string>();
  t.dt = h.at("dt").get<double>();
  t.store_every = h.at("store_every").get<int>();
  t.band = h.at("band").get<int>();
  const int d = h.at("dim").get<int>(), m = h.at("resolution").get<int>(),
            c = h.at("components").get<int>();
  for (double time : h.at("times").get<std::vector<double>>()) {
    SpectralField u(d, m, c);
    in.read(reinterpret_cast<char*>(u.data().data()),
            static_cast<std::streamsize>(u.data().size() * sizeof(spectral::Complex)));
    if (!in) throw ConfigError(path + ": truncated snapshot data");
    t.push(time, std::move(u));
  }
  return t;
}

}  // namespace torusinv::forward
