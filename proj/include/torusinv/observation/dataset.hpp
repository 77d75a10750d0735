#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusinv/core/design.hpp"
#include "torusinv/core/rng.hpp"
#include "torusinv/forward/trajectory.hpp"

namespace torusinv::observation {

enum class NoiseKind { gaussian, bounded_uniform };
enum class VarianceRule { constant, per_sensor, random };

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "gaussian") return NoiseKind::gaussian;
  if (s == "bounded_uniform") return NoiseKind::bounded_uniform;
  throw ConfigError("unknown noise kind '" + s + "'");
}
inline std::string to_string(NoiseKind k) {
  return k == NoiseKind::gaussian ? "gaussian" : "bounded_uniform";
}
inline VarianceRule parse_variance_rule(const std::string& s) {
  if (s == "constant") return VarianceRule::constant;
  if (s == "per_sensor") return VarianceRule::per_sensor;
  if (s == "random") return VarianceRule::random;
  throw ConfigError("unknown variance rule '" + s + "'");
}
inline std::string to_string(VarianceRule r) {
  switch (r) {
    case VarianceRule::constant: return "constant";
    case VarianceRule::per_sensor: return "per_sensor";
    default: return "random";
  }
}

/// Centered noise with per-record variance sigma_i^2. bounded_uniform draws
/// are uniform on [-sqrt(3) sigma, sqrt(3) sigma].
struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian;
  VarianceRule rule = VarianceRule::constant;
  double sigma2 = 1.0;
  std::vector<double> sensor_sigma2;
  double sigma2_min = 0.5;
  double sigma2_max = 2.0;
  /// Testing only: y = G(theta)(Z) exactly.
  bool noiseless = false;

  void validate() const {
    const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    switch (rule) {
      case VarianceRule::constant:
        if (!positive(sigma2)) throw ConfigError("noise sigma2 must be positive");
        break;
      case VarianceRule::per_sensor:
        if (sensor_sigma2.empty()) throw ConfigError("per_sensor noise needs sensor variances");
        for (double v : sensor_sigma2)
          if (!positive(v)) throw ConfigError("sensor variances must be positive");
        break;
      case VarianceRule::random:
        if (!positive(sigma2_min) || !(sigma2_max >= sigma2_min) || !std::isfinite(sigma2_max))
          throw ConfigError("random noise needs 0 < sigma2_min <= sigma2_max");
        break;
    }
  }

  /// [sigma_0^2, sigma_inf^2] bounds implied by the rule.
  std::array<double, 2> variance_bounds() const {
    switch (rule) {
      case VarianceRule::constant: return {sigma2, sigma2};
      case VarianceRule::per_sensor: {
        const auto [lo, hi] = std::minmax_element(sensor_sigma2.begin(), sensor_sigma2.end());
        return {*lo, *hi};
      }
      default: return {sigma2_min, sigma2_max};
    }
  }

  /// One noise draw with variance s2 from a uniform in (0,1).
  double draw(double s2, std::uint64_t key, std::uint64_t counter) const {
    if (kind == NoiseKind::gaussian) return std::sqrt(s2) * normal_at(key, counter);
    return std::sqrt(3.0 * s2) * (2.0 * uniform_at(key, counter) - 1.0);
  }
};

/// Per-sensor variances drawn once, uniformly in [lo, hi] * base.
inline std::vector<double> draw_sensor_variances(int sensors, double base, std::uint64_t seed,
                                                 double lo = 0.5, double hi = 2.0) {
  std::vector<double> v(static_cast<std::size_t>(sensors));
  const auto key = derive_key(seed, "sensor-variances");
  for (int j = 0; j < sensors; ++j) v[j] = base * (lo + (hi - lo) * uniform_at(key, j));
  return v;
}

enum class DesignKind { uniform_time_space, uniform_time_fixed_sensors };

inline DesignKind parse_design_kind(const std::string& s) {
  if (s == "uniform_time_space") return DesignKind::uniform_time_space;
  if (s == "uniform_time_fixed_sensors") return DesignKind::uniform_time_fixed_sensors;
  throw ConfigError("unknown design '" + s + "'");
}
inline std::string to_string(DesignKind k) {
  return k == DesignKind::uniform_time_space ? "uniform_time_space" : "uniform_time_fixed_sensors";
}

/// Design law: t ~ U[0, T] and x ~ U[0,1)^d, or x uniform over fixed sensors.
struct DesignSpec {
  DesignKind kind = DesignKind::uniform_time_space;
  double horizon = 1.0;
  int dim = 1;
  std::vector<std::array<double, 2>> sensors;
};

/// L_X sensors on an equispaced lattice (per axis in 2D: ceil(sqrt(L_X))).
inline std::vector<std::array<double, 2>> equispaced_sensors(int dim, int count) {
  if (count < 1) throw ConfigError("sensor count must be >= 1");
  std::vector<std::array<double, 2>> s;
  if (dim == 1) {
    for (int j = 0; j < count; ++j) s.push_back({double(j) / count, 0.0});
    return s;
  }
  const int side = static_cast<int>(std::ceil(std::sqrt(double(count))));
  for (int a = 0; a < side && int(s.size()) < count; ++a)
    for (int b = 0; b < side && int(s.size()) < count; ++b)
      s.push_back({double(a) / side, double(b) / side});
  return s;
}

struct Record {
  double t = 0.0;
  std::array<double, 2> x{0.0, 0.0};
  std::array<double, 2> y{0.0, 0.0};
  int sensor = -1;
  double sigma2 = 0.0;
};

struct Dataset {
  std::vector<Record> records;
  int value_dim = 1;
  DesignSpec design;
  NoiseModel noise;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return records.size(); }

  std::vector<DesignPoint> design_points() const {
    std::vector<DesignPoint> p;
    p.reserve(records.size());
    for (const auto& r : records) p.push_back({r.t, r.x, r.sensor});
    return p;
  }
  std::vector<double> true_sigma2() const {
    std::vector<double> s;
    s.reserve(records.size());
    for (const auto& r : records) s.push_back(r.sigma2);
    return s;
  }
};

/// N design points drawn i.i.d. from the design law.
inline std::vector<DesignPoint> draw_design(const DesignSpec& design, std::size_t n,
                                            std::uint64_t seed) {
  if (design.kind == DesignKind::uniform_time_fixed_sensors && design.sensors.empty())
    throw ConfigError("fixed-sensor design with no sensors");
  std::vector<DesignPoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto key = derive_key(seed, "design", {i});
    auto& p = pts[i];
    p.t = design.horizon * uniform_at(key, 0);
    if (design.kind == DesignKind::uniform_time_space) {
      p.x = {uniform_at(key, 1), design.dim == 2 ? uniform_at(key, 2) : 0.0};
    } else {
      const auto count = design.sensors.size();
      p.sensor = static_cast<int>(std::min<std::size_t>(
          count - 1, static_cast<std::size_t>(uniform_at(key, 1) * static_cast<double>(count))));
      p.x = design.sensors[static_cast<std::size_t>(p.sensor)];
    }
  }
  return pts;
}

/// Y_i = G(theta_0)(Z_i) + eps_i with eps_i independent, variance sigma_i^2.
inline Dataset generate_dataset(const forward::Trajectory& traj, std::size_t n,
                                const NoiseModel& noise, const DesignSpec& design,
                                std::uint64_t seed) {
  if (n < 1) throw ConfigError("dataset size must be >= 1");
  noise.validate();
  if (design.horizon > traj.horizon() * (1.0 + 1e-12))
    throw PreconditionError("trajectory horizon does not cover the design");
  if (noise.rule == VarianceRule::per_sensor &&
      (design.kind != DesignKind::uniform_time_fixed_sensors ||
       noise.sensor_sigma2.size() != design.sensors.size()))
    throw ConfigError("per_sensor noise needs one variance per design sensor");
  Dataset ds;
  ds.value_dim = traj.components();
  ds.design = design;
  ds.noise = noise;
  ds.seed = seed;
  const auto pts = draw_design(design, n, seed);
  const auto values = forward::evaluate_forward(traj, pts);
  ds.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = ds.records[i];
    r.t = pts[i].t;
    r.x = pts[i].x;
    r.sensor = pts[i].sensor;
    switch (noise.rule) {
      case VarianceRule::constant: r.sigma2 = noise.sigma2; break;
      case VarianceRule::per_sensor:
        r.sigma2 = noise.sensor_sigma2[static_cast<std::size_t>(r.sensor)];
        break;
      case VarianceRule::random:
        r.sigma2 = noise.sigma2_min +
                   (noise.sigma2_max - noise.sigma2_min) * uniform_at(derive_key(seed, "sigma2"), i);
        break;
    }
    const auto key = derive_key(seed, "noise", {i});
    for (int c = 0; c < ds.value_dim; ++c)
      r.y[c] = values[i][c] + (noise.noiseless ? 0.0 : noise.draw(r.sigma2, key, c));
  }
  return ds;
}

inline nlohmann::json design_to_json(const DesignSpec& d) {
  nlohmann::json j{{"kind", to_string(d.kind)}, {"horizon", d.horizon}, {"dim", d.dim}};
  auto s = nlohmann::json::array();
  for (const auto& x : d.sensors) s.push_back(d.dim == 1 ? nlohmann::json{x[0]} : nlohmann::json{x[0], x[1]});
  j["sensors"] = s;
  return j;
}

inline DesignSpec design_from_json(const nlohmann::json& j) {
  DesignSpec d;
  d.kind = parse_design_kind(j.at("kind").get<std::string>());
  d.horizon = j.at("horizon").get<double>();
  d.dim = j.at("dim").get<int>();
  for (const auto& s : j.at("sensors")) d.sensors.push_back({s.at(0).get<double>(), s.size() > 1 ? s.at(1).get<double>() : 0.0});
  return d;
}

/// Header line with design and noise metadata, then one record per line.
inline void write_dataset(std::ostream& out, const Dataset& ds) {
  nlohmann::json h{{"format", "torusinv-dataset"},
                   {"version", 1},
                   {"N", ds.size()},
                   {"value_dim", ds.value_dim},
                   {"seed", ds.seed},
                   {"design", design_to_json(ds.design)},
                   {"noise", {{"kind", to_string(ds.noise.kind)},
                              {"rule", to_string(ds.noise.rule)},
                              {"noiseless", ds.noise.noiseless}}}};
  out << h.dump() << '\n';
  const int d = ds.design.dim;
  for (const auto& r : ds.records) {
    nlohmann::json j;
    j["t"] = r.t;
    j["x"] = d == 1 ? nlohmann::json{r.x[0]} : nlohmann::json{r.x[0], r.x[1]};
    j["y"] = ds.value_dim == 1 ? nlohmann::json{r.y[0]} : nlohmann::json{r.y[0], r.y[1]};
    j["sensor"] = r.sensor;
    j["sigma2"] = r.sigma2;
    out << j.dump() << '\n';
  }
}

inline std::string dataset_to_string(const Dataset& ds) {
  std::ostringstream s;
  write_dataset(s, ds);
  return s.str();
}

inline void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_dataset(out, ds);
}

inline Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty dataset file");
  const auto h = nlohmann::json::parse(line);
  if (h.value("format", "") != "torusinv-dataset") throw ConfigError("not a dataset file");
  Dataset ds;
  ds.value_dim = h.at("value_dim").get<int>();
  ds.seed = h.at("seed").get<std::uint64_t>();
  ds.design = design_from_json(h.at("design"));
  ds.noise.kind = parse_noise_kind(h.at("noise").at("kind").get<std::string>());
  ds.noise.rule = parse_variance_rule(h.at("noise").at("rule").get<std::string>());
  ds.noise.noiseless = h.at("noise").at("noiseless").get<bool>();
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Record r;
      r.t = j.at("t").get<double>();
      const auto& x = j.at("x");
      r.x = {x.at(0).get<double>(), x.size() > 1 ? x.at(1).get<double>() : 0.0};
      const auto& y = j.at("y");
      r.y = {y.at(0).get<double>(), y.size() > 1 ? y.at(1).get<double>() : 0.0};
      r.sensor = j.at("sensor").get<int>();
      r.sigma2 = j.at("sigma2").get<double>();
      ds.records.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (ds.records.size() != h.at("N").get<std::size_t>())
    throw ConfigError("dataset record count does not match header");
  return ds;
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_dataset(in);
}

}  // namespace torusinv::observation
