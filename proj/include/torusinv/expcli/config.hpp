#pragma once

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusinv/diagnostics.hpp"

namespace torusinv::expcli {

using nlohmann::json;

enum class ExperimentKind { rde_noise, nse_params, nse_oseen };

inline std::optional<ExperimentKind> parse_kind(const std::string& s) {
  if (s == "rde_noise") return ExperimentKind::rde_noise;
  if (s == "nse_params") return ExperimentKind::nse_params;
  if (s == "nse_oseen") return ExperimentKind::nse_oseen;
  return std::nullopt;
}

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::rde_noise: return "rde_noise";
    case ExperimentKind::nse_params: return "nse_params";
    default: return "nse_oseen";
  }
}

inline bool is_nse(ExperimentKind k) { return k != ExperimentKind::rde_noise; }

/// f = amplitude * sqrt(2) cos(2 pi k.x) (k_2, -k_1)/|k|, or zero.
struct ForcingConfig {
  std::string kind = "none";
  std::array<int, 2> k{1, 1};
  double amplitude = 0.0;
};

struct PdeConfig {
  int dim = 1;
  int resolution = 32;
  double horizon = 0.5;
  double dt = 0.005;
  forward::ReactionTerm reaction;
  double viscosity = 0.1;
  ForcingConfig forcing;
};

struct PriorConfig {
  double alpha = 4.0;
  /// Regularity index of the parameter space R = H^beta.
  double beta = 3.2;
  int sieve_dim = 0;
  spectral::Eigenweight eigenweight = spectral::Eigenweight::four_pi_squared;
  double kappa = 0.0;
  /// Rescale the prior by N delta_N^2.
  bool rescale = true;
};

struct TruthConfig {
  std::uint64_t seed = 1;
  /// alpha_truth; 0 selects alpha + 1.
  double smoothness = 0.0;
  double scale = 1.0;
};

struct DataConfig {
  observation::DesignKind design = observation::DesignKind::uniform_time_fixed_sensors;
  int sensors = 16;
  observation::NoiseKind noise = observation::NoiseKind::gaussian;
  observation::VarianceRule rule = observation::VarianceRule::constant;
  double sigma2 = 1e-2;
  /// Per-sensor variances are drawn uniformly in sigma2 * [spread_lo, spread_hi];
  /// the random rule draws per-record variances in the same range.
  double spread_lo = 0.5;
  double spread_hi = 2.0;
};

enum class VarianceSource { exact, proxy };

struct SurrogateConfig {
  VarianceSource variances = VarianceSource::exact;
  double panel_window = 0.002;
  int panel_points = 1000;
  /// Proxy inflation in standard errors of the sample variance.
  double inflate = 0.0;
  double floor = 0.0;
  /// exact | reaction | nse_params | oseen
  std::string forward = "exact";
  double reaction_amplitude = 1.0;
  double reaction_half_width = 10.0;
  double viscosity = 0.0;
  double forcing_amplitude = 0.0;
  forward::OseenOptions oseen{};
};

struct SamplerConfig {
  inference::PcnOptions pcn{};
  /// Start the chain at the MAP estimate when it converged.
  bool init_at_map = true;
};

struct DiagnosticsConfig {
  int quadrature = 4000;
  int model_probes = 4;
  std::vector<double> model_radii{1.0};
  double c_noise = 0.0;
  double c_model = 0.0;
};

struct OutputConfig {
  std::string directory = "results";
  /// Write measured wall time into runtime_s; off keeps result files
  /// byte-reproducible.
  bool record_runtime = false;
};

struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::rde_noise;
  PdeConfig pde;
  PriorConfig prior;
  TruthConfig truth;
  std::vector<long> Ns;
  int seeds = 1;
  DataConfig data;
  SurrogateConfig surrogate;
  SamplerConfig sampler;
  inference::OptimizerConfig map{};
  DiagnosticsConfig diagnostics;
  OutputConfig output;
  json source = json::object();

  double truth_smoothness() const {
    return truth.smoothness > 0.0 ? truth.smoothness : prior.alpha + 1.0;
  }
};

struct ConfigIssue {
  std::string key;
  std::string message;
};

struct ValidationReport {
  std::vector<ConfigIssue> errors;
  std::vector<ConfigIssue> warnings;
  bool ok() const noexcept { return errors.empty(); }

  void error(std::string key, std::string msg) { errors.push_back({std::move(key), std::move(msg)}); }
  void warn(std::string key, std::string msg) { warnings.push_back({std::move(key), std::move(msg)}); }
};

inline std::string format_issue(const ConfigIssue& i) {
  return i.key.empty() ? i.message : i.key + ": " + i.message;
}

inline json to_json(const ValidationReport& r) {
  auto list = [](const std::vector<ConfigIssue>& v) {
    json a = json::array();
    for (const auto& i : v) a.push_back({{"key", i.key}, {"message", i.message}});
    return a;
  };
  return {{"ok", r.ok()}, {"errors", list(r.errors)}, {"warnings", list(r.warnings)}};
}

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

template <class T>
std::string type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else if constexpr (std::is_same_v<T, std::string>) return "a string";
  else return "a list";
}

/// Reads fields of one JSON object, recording missing, mistyped and unknown keys.
class Section {
 public:
  Section(const json* obj, std::string path, ValidationReport& rep)
      : obj_(obj), path_(std::move(path)), rep_(&rep) {}

  bool present() const { return obj_ != nullptr; }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

  template <class T>
  T get(const std::string& key, T fallback, bool required = false) {
    seen_.push_back(key);
    if (!obj_) return fallback;
    const auto it = obj_->find(key);
    if (it == obj_->end()) {
      if (required) rep_->error(join(path_, key), "missing required key");
      return fallback;
    }
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer()) {
        rep_->error(join(path_, key), "expected " + type_name<T>());
        return fallback;
      }
    }
    if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) {
        rep_->error(join(path_, key), "expected " + type_name<T>());
        return fallback;
      }
    }
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      rep_->error(join(path_, key), "expected " + type_name<T>());
      return fallback;
    }
  }

  Section child(const std::string& key, bool required = false) {
    seen_.push_back(key);
    if (!obj_) return {nullptr, join(path_, key), *rep_};
    const auto it = obj_->find(key);
    if (it == obj_->end()) {
      if (required) rep_->error(join(path_, key), "missing required section");
      return {nullptr, join(path_, key), *rep_};
    }
    if (!it->is_object()) {
      rep_->error(join(path_, key), "expected an object");
      return {nullptr, join(path_, key), *rep_};
    }
    return {&*it, join(path_, key), *rep_};
  }

  /// Warn about keys that were never read.
  void finish() const {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        rep_->warn(join(path_, it.key()), "unknown key (ignored)");
  }

  const std::string& path() const noexcept { return path_; }
  std::string key(const std::string& k) const { return join(path_, k); }

 private:
  const json* obj_;
  std::string path_;
  ValidationReport* rep_;
  std::vector<std::string> seen_;
};

/// Run a parser that reports by exception, recording the message.
template <class F>
auto capture(ValidationReport& rep, const std::string& key, F&& f) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const std::exception& e) {
    rep.error(key, e.what());
    return std::nullopt;
  }
}

/// Whether a directory could be created or written: the nearest existing
/// ancestor must be a writable directory.
inline bool writable_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::path p = fs::absolute(dir.empty() ? fs::path(".") : fs::path(dir), ec);
  if (ec) return false;
  while (!p.empty() && !fs::exists(p, ec)) {
    if (p == p.parent_path()) break;
    p = p.parent_path();
  }
  return fs::is_directory(p, ec) && ::access(p.c_str(), W_OK) == 0;
}

}  // namespace detail

/// Build a config from parsed JSON, collecting every problem into `rep`.
inline ExperimentConfig parse_config(const json& j, ValidationReport& rep) {
  using detail::Section;
  ExperimentConfig c;
  c.source = j;
  if (!j.is_object()) {
    rep.error("", "config must be a JSON object");
    return c;
  }
  Section root(&j, "", rep);

  const auto kind = root.get<std::string>("experiment", "", true);
  if (!kind.empty()) {
    if (auto k = parse_kind(kind)) c.kind = *k;
    else rep.error("experiment", "unknown experiment '" + kind + "' (expected rde_noise, nse_params or nse_oseen)");
  }
  c.name = root.get<std::string>("name", kind);

  auto pde = root.child("pde", true);
  c.pde.dim = pde.get<int>("dim", c.pde.dim, true);
  c.pde.resolution = pde.get<int>("resolution", c.pde.resolution, true);
  c.pde.horizon = pde.get<double>("horizon", c.pde.horizon, true);
  c.pde.dt = pde.get<double>("dt", c.pde.dt, true);
  if (pde.present()) {
    if (!is_nse(c.kind)) {
      auto r = pde.child("reaction");
      const auto rk = r.get<std::string>("kind", "zero");
      const double a = r.get<double>("amplitude", 1.0);
      const double b = r.get<double>("half_width", 10.0);
      if (rk == "smooth_bump") {
        if (auto f = detail::capture(rep, r.key("half_width"), [&] { return forward::ReactionTerm::bump(a, b); }))
          c.pde.reaction = *f;
      } else if (rk != "zero") {
        rep.error(r.key("kind"), "unknown reaction '" + rk + "' (expected zero or smooth_bump)");
      }
      r.finish();
    } else {
      c.pde.viscosity = pde.get<double>("viscosity", c.pde.viscosity, true);
      auto f = pde.child("forcing");
      c.pde.forcing.kind = f.get<std::string>("kind", "none");
      c.pde.forcing.k = f.get<std::array<int, 2>>("k", c.pde.forcing.k);
      c.pde.forcing.amplitude = f.get<double>("amplitude", 0.0);
      if (c.pde.forcing.kind != "none" && c.pde.forcing.kind != "stokes_mode")
        rep.error(f.key("kind"), "unknown forcing '" + c.pde.forcing.kind + "' (expected none or stokes_mode)");
      f.finish();
    }
  }
  pde.finish();

  auto prior = root.child("prior", true);
  c.prior.alpha = prior.get<double>("alpha", c.prior.alpha, true);
  c.prior.beta = prior.get<double>("beta", c.prior.beta, true);
  c.prior.sieve_dim = prior.get<int>("sieve_dim", 0);
  c.prior.kappa = prior.get<double>("kappa", 0.0);
  c.prior.rescale = prior.get<bool>("rescale", true);
  const auto ew = prior.get<std::string>("eigenweight", "4pi2");
  if (auto w = detail::capture(rep, prior.key("eigenweight"), [&] { return spectral::parse_eigenweight(ew); }))
    c.prior.eigenweight = *w;
  prior.finish();

  auto truth = root.child("truth", true);
  c.truth.seed = truth.get<std::uint64_t>("seed", 1, true);
  c.truth.smoothness = truth.get<double>("smoothness", 0.0);
  c.truth.scale = truth.get<double>("scale", 1.0);
  truth.finish();

  c.Ns = root.get<std::vector<long>>("Ns", {}, true);
  c.seeds = root.get<int>("seeds", 1, true);

  auto data = root.child("data", true);
  {
    auto d = data.child("design", true);
    const auto dk = d.get<std::string>("kind", "uniform_time_fixed_sensors");
    if (auto k = detail::capture(rep, d.key("kind"), [&] { return observation::parse_design_kind(dk); }))
      c.data.design = *k;
    c.data.sensors = d.get<int>("sensors", c.data.sensors);
    d.finish();
    auto n = data.child("noise", true);
    const auto nk = n.get<std::string>("kind", "gaussian");
    if (auto k = detail::capture(rep, n.key("kind"), [&] { return observation::parse_noise_kind(nk); }))
      c.data.noise = *k;
    const auto rule = n.get<std::string>("rule", "constant");
    if (auto r = detail::capture(rep, n.key("rule"), [&] { return observation::parse_variance_rule(rule); }))
      c.data.rule = *r;
    c.data.sigma2 = n.get<double>("sigma2", c.data.sigma2, true);
    const auto spread = n.get<std::array<double, 2>>("spread", {0.5, 2.0});
    c.data.spread_lo = spread[0];
    c.data.spread_hi = spread[1];
    n.finish();
  }
  data.finish();

  auto sur = root.child("surrogate", true);
  {
    const auto v = sur.get<std::string>("variances", "exact");
    if (v == "proxy") c.surrogate.variances = VarianceSource::proxy;
    else if (v != "exact") rep.error(sur.key("variances"), "expected exact or proxy");
    auto panel = sur.child("panel", c.surrogate.variances == VarianceSource::proxy);
    c.surrogate.panel_window = panel.get<double>("window", c.surrogate.panel_window);
    c.surrogate.panel_points = panel.get<int>("points", c.surrogate.panel_points);
    c.surrogate.inflate = panel.get<double>("inflate", 0.0);
    panel.finish();
    c.surrogate.floor = sur.get<double>("floor", 0.0);
    auto fwd = sur.child("forward");
    c.surrogate.forward = fwd.get<std::string>("kind", "exact");
    const auto& fk = c.surrogate.forward;
    if (fk == "reaction") {
      c.surrogate.reaction_amplitude = fwd.get<double>("amplitude", c.pde.reaction.amplitude, true);
      c.surrogate.reaction_half_width = fwd.get<double>("half_width", c.pde.reaction.half_width);
    } else if (fk == "nse_params") {
      c.surrogate.viscosity = fwd.get<double>("viscosity", c.pde.viscosity, true);
      c.surrogate.forcing_amplitude = fwd.get<double>("forcing_amplitude", c.pde.forcing.amplitude);
    } else if (fk == "oseen") {
      c.surrogate.oseen.iterations = fwd.get<int>("iterations", 0);
      c.surrogate.oseen.tolerance = fwd.get<double>("tolerance", 0.0);
      c.surrogate.oseen.max_iterations = fwd.get<int>("max_iterations", 50);
    } else if (fk != "exact") {
      rep.error(fwd.key("kind"), "unknown surrogate forward '" + fk + "'");
    }
    fwd.finish();
  }
  sur.finish();

  auto smp = root.child("sampler", true);
  auto& p = c.sampler.pcn;
  p.beta = smp.get<double>("beta", p.beta);
  p.steps = smp.get<int>("steps", p.steps, true);
  p.burn_in = smp.get<int>("burn_in", p.burn_in);
  p.thinning = smp.get<int>("thinning", p.thinning);
  p.adapt = smp.get<bool>("adapt", p.adapt);
  p.adapt_window = smp.get<int>("adapt_window", p.adapt_window);
  p.adapt_gain = smp.get<double>("adapt_gain", p.adapt_gain);
  p.target_accept = smp.get<double>("target_accept", p.target_accept);
  const auto init = smp.get<std::string>("init", "map");
  if (init == "zero") c.sampler.init_at_map = false;
  else if (init != "map") rep.error(smp.key("init"), "expected map or zero");
  smp.finish();

  auto map = root.child("map");
  c.map.starts = map.get<int>("starts", c.map.starts);
  c.map.max_iterations = map.get<int>("max_iterations", c.map.max_iterations);
  c.map.grad_tol = map.get<double>("grad_tol", c.map.grad_tol);
  c.map.fd_step = map.get<double>("fd_step", c.map.fd_step);
  c.map.line_tol = map.get<double>("line_tol", c.map.line_tol);
  c.map.initial_step = map.get<double>("initial_step", c.map.initial_step);
  map.finish();

  auto diag = root.child("diagnostics");
  c.diagnostics.quadrature = diag.get<int>("quadrature", c.diagnostics.quadrature);
  c.diagnostics.model_probes = diag.get<int>("model_probes", c.diagnostics.model_probes);
  c.diagnostics.model_radii = diag.get<std::vector<double>>("model_radii", c.diagnostics.model_radii);
  c.diagnostics.c_noise = diag.get<double>("c_noise", 0.0);
  c.diagnostics.c_model = diag.get<double>("c_model", 0.0);
  diag.finish();

  auto out = root.child("output", true);
  c.output.directory = out.get<std::string>("directory", "", true);
  c.output.record_runtime = out.get<bool>("record_runtime", false);
  out.finish();

  root.finish();
  return c;
}

/// Semantic checks on a parsed config: errors for unusable values, warnings
/// for smoothness hypotheses that do not hold. Nothing is adjusted.
inline void check_config(const ExperimentConfig& c, ValidationReport& rep) {
  const bool nse = is_nse(c.kind);
  const int d = c.pde.dim;

  if (auto r = detail::capture(rep, "pde.resolution", [&] {
        spectral::check_resolution(c.pde.dim, c.pde.resolution);
        return 0;
      }); !r) {
    return;
  }
  if (nse && d != 2) rep.error("pde.dim", "Navier-Stokes experiments need dim = 2");
  if (!(c.pde.horizon > 0.0)) rep.error("pde.horizon", "must be positive");
  if (!(c.pde.dt > 0.0) || c.pde.dt > c.pde.horizon) rep.error("pde.dt", "must satisfy 0 < dt <= horizon");
  if (nse && !(c.pde.viscosity > 0.0)) rep.error("pde.viscosity", "must be positive");

  if (c.Ns.empty()) rep.error("Ns", "needs at least one sample size");
  for (std::size_t i = 0; i < c.Ns.size(); ++i) {
    if (c.Ns[i] < 2) rep.error("Ns", "sample sizes must be >= 2");
    if (i > 0 && c.Ns[i] <= c.Ns[i - 1]) rep.error("Ns", "must be strictly increasing");
  }
  if (c.seeds < 1) rep.error("seeds", "must be >= 1");

  priors::PriorSpec spec;
  spec.alpha = c.prior.alpha;
  spec.sieve_dim = c.prior.sieve_dim;
  spec.basis = nse ? priors::BasisKind::stokes_divfree : priors::BasisKind::torus_scalar;
  spec.dim = d;
  spec.resolution = c.pde.resolution;
  spec.eigenweight = c.prior.eigenweight;
  if (!nse || d == 2) detail::capture(rep, "prior", [&] { return priors::PriorBasis(spec).size(); });
  if (!(c.prior.beta > 0.0)) rep.error("prior.beta", "must be positive");
  if (c.prior.kappa < 0.0) rep.error("prior.kappa", "must be >= 0");
  if (!(c.truth.scale > 0.0)) rep.error("truth.scale", "must be positive");

  if (c.data.sensors < 1) rep.error("data.design.sensors", "must be >= 1");
  if (!(c.data.sigma2 > 0.0)) rep.error("data.noise.sigma2", "must be positive");
  if (!(c.data.spread_lo > 0.0) || c.data.spread_hi < c.data.spread_lo)
    rep.error("data.noise.spread", "needs 0 < lo <= hi");
  const bool fixed = c.data.design == observation::DesignKind::uniform_time_fixed_sensors;
  if (c.data.rule == observation::VarianceRule::per_sensor && !fixed)
    rep.error("data.noise.rule", "per_sensor variances need the uniform_time_fixed_sensors design");

  if (c.surrogate.variances == VarianceSource::proxy) {
    if (!fixed) rep.error("surrogate.variances", "variance proxies need fixed sensors");
    if (c.data.rule == observation::VarianceRule::random)
      rep.error("surrogate.variances", "variance proxies need constant or per_sensor variances");
    if (!(c.surrogate.panel_window > 0.0) || c.surrogate.panel_window > c.pde.horizon)
      rep.error("surrogate.panel.window", "must satisfy 0 < window <= horizon");
    if (c.surrogate.panel_points < 2) rep.error("surrogate.panel.points", "must be >= 2");
    if (c.surrogate.inflate < 0.0) rep.error("surrogate.panel.inflate", "must be >= 0");
  }
  if (c.surrogate.floor < 0.0) rep.error("surrogate.floor", "must be >= 0");
  const auto& fk = c.surrogate.forward;
  if (fk == "reaction" && nse) rep.error("surrogate.forward.kind", "reaction surrogates need the reaction-diffusion model");
  if ((fk == "nse_params" || fk == "oseen") && !nse)
    rep.error("surrogate.forward.kind", fk + " surrogates need a Navier-Stokes experiment");
  if (fk == "reaction" && !(c.surrogate.reaction_half_width > 0.0))
    rep.error("surrogate.forward.half_width", "must be positive");
  if (fk == "nse_params" && !(c.surrogate.viscosity > 0.0))
    rep.error("surrogate.forward.viscosity", "must be positive");
  if (fk == "oseen" && ((c.surrogate.oseen.iterations > 0) == (c.surrogate.oseen.tolerance > 0.0)))
    rep.error("surrogate.forward", "oseen needs exactly one of iterations > 0 or tolerance > 0");
  if (c.kind == ExperimentKind::nse_params && fk != "nse_params" && fk != "exact")
    rep.warn("surrogate.forward.kind", "nse_params experiments perturb viscosity or forcing; got " + fk);
  if (c.kind == ExperimentKind::nse_oseen && fk != "oseen" && fk != "exact")
    rep.warn("surrogate.forward.kind", "nse_oseen experiments use the oseen surrogate; got " + fk);

  detail::capture(rep, "sampler", [&] {
    c.sampler.pcn.validate();
    return 0;
  });
  detail::capture(rep, "map", [&] {
    c.map.validate();
    return 0;
  });
  if (c.diagnostics.quadrature < 2) rep.error("diagnostics.quadrature", "must be >= 2");
  if (c.diagnostics.model_probes < 1) rep.error("diagnostics.model_probes", "must be >= 1");
  for (std::size_t k = 0; k < c.diagnostics.model_radii.size(); ++k)
    if (!(c.diagnostics.model_radii[k] > 0.0) || (k > 0 && c.diagnostics.model_radii[k] <= c.diagnostics.model_radii[k - 1]))
      rep.error("diagnostics.model_radii", "must be positive and strictly increasing");
  if (c.diagnostics.model_radii.empty()) rep.error("diagnostics.model_radii", "needs at least one radius");

  if (c.output.directory.empty()) rep.error("output.directory", "must not be empty");
  else if (!detail::writable_directory(c.output.directory))
    rep.error("output.directory", "'" + c.output.directory + "' is not writable");

  // Smoothness hypotheses: warn, never adjust.
  const double a = c.prior.alpha, b = c.prior.beta;
  auto fmt = [](double x) {
    std::ostringstream s;
    s << x;
    return s.str();
  };
  if (!nse) {
    if (!(b > 2.0 + d))
      rep.warn("prior.beta", "hypothesis beta > 2 + d violated (beta = " + fmt(b) + ", d = " + std::to_string(d) + ")");
    if (!(a > b + 0.5 * d))
      rep.warn("prior.alpha", "hypothesis alpha > beta + d/2 violated (alpha = " + fmt(a) + ", beta = " + fmt(b) + ")");
  } else {
    if (!(b > 4.0)) rep.warn("prior.beta", "hypothesis beta > 4 violated (beta = " + fmt(b) + ")");
    if (!(a > b + 1.0))
      rep.warn("prior.alpha", "hypothesis alpha > beta + 1 violated (alpha = " + fmt(a) + ", beta = " + fmt(b) + ")");
  }
  if (c.truth_smoothness() <= a)
    rep.warn("truth.smoothness", "truth is not smoother than the prior (alpha_truth = " + fmt(c.truth_smoothness()) +
                                     " <= alpha = " + fmt(a) + ")");
  if (c.kind == ExperimentKind::rde_noise && c.surrogate.variances != VarianceSource::proxy)
    rep.warn("surrogate.variances", "rde_noise runs without variance proxies (exact-likelihood baseline)");
}

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

struct LoadedConfig {
  ExperimentConfig config;
  ValidationReport report;
};

inline LoadedConfig parse_config_text(const std::string& text) {
  LoadedConfig out;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (auto p = msg.find("]: "); p != std::string::npos) msg = msg.substr(p + 3);
    out.report.error("", "parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
    return out;
  }
  out.config = parse_config(j, out.report);
  if (out.report.ok()) check_config(out.config, out.report);
  return out;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Parse and check a config file.
inline ValidationReport validate_config(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    ValidationReport r;
    r.error("", "config file '" + path + "' does not exist");
    return r;
  }
  return parse_config_text(read_text(path)).report;
}

/// Load a config, throwing ConfigError listing every error.
inline ExperimentConfig load_config(const std::string& path) {
  auto loaded = parse_config_text(read_text(path));
  if (!loaded.report.ok()) {
    std::string msg = "invalid config '" + path + "':";
    for (const auto& e : loaded.report.errors) msg += "\n  " + format_issue(e);
    throw ConfigError(msg);
  }
  return std::move(loaded.config);
}

}  // namespace torusinv::expcli
