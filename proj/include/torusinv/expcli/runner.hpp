#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <thread>

#include "torusinv/expcli/config.hpp"
#include "torusinv/expcli/results.hpp"

namespace torusinv::expcli {

using spectral::SpectralField;

inline spectral::SobolevFlavor regularity_flavor(const ExperimentConfig& c) {
  return is_nse(c.kind) ? spectral::SobolevFlavor::homogeneous : spectral::SobolevFlavor::inhomogeneous;
}

/// Sieve prior for sample size n (rescaled by N delta_N^2 when enabled).
inline priors::PriorSpec prior_spec(const ExperimentConfig& c, double n) {
  priors::PriorSpec s;
  s.alpha = c.prior.alpha;
  s.sieve_dim = c.prior.sieve_dim;
  s.basis = is_nse(c.kind) ? priors::BasisKind::stokes_divfree : priors::BasisKind::torus_scalar;
  s.dim = c.pde.dim;
  s.resolution = c.pde.resolution;
  s.eigenweight = c.prior.eigenweight;
  s.rescale = c.prior.rescale ? priors::auto_rescale(c.prior.alpha, c.prior.kappa, c.pde.dim, n) : 0.0;
  return s;
}

inline double delta_n(const ExperimentConfig& c, double n) {
  return priors::contraction_rate(c.prior.alpha, c.prior.kappa, c.pde.dim, n);
}

/// Reference slope of the L^2 error in log N: -(alpha+kappa)/(2alpha+2kappa+d) * beta/(beta+1).
inline double reference_slope(const ExperimentConfig& c) {
  const double a = c.prior.alpha + c.prior.kappa;
  return -a / (2.0 * a + c.pde.dim) * c.prior.beta / (c.prior.beta + 1.0);
}

/// Ground truth for a seed: a draw from the alpha_truth series on the same
/// sieve as the inference prior, times truth.scale. Independent of N.
inline SpectralField truth_field(const ExperimentConfig& c, std::uint64_t seed) {
  const priors::PriorBasis inference(prior_spec(c, 2.0));
  auto spec = prior_spec(c, 2.0);
  spec.alpha = c.truth_smoothness();
  spec.rescale = 0.0;
  spec.sieve_dim = int(inference.size());
  const priors::PriorBasis basis(spec);
  return priors::sample_prior(basis, derive_key(c.truth.seed, "truth", {seed})) * c.truth.scale;
}

inline SpectralField forcing_field(const PdeConfig& p, double amplitude) {
  SpectralField f(2, p.resolution, 2);
  if (p.forcing.kind == "none" || amplitude == 0.0) return f;
  const auto k = p.forcing.k;
  const double n = std::hypot(k[0], k[1]);
  if (n == 0.0) throw ConfigError("forcing wavevector must be nonzero");
  const std::array<double, 2> dir{k[1] / n, -k[0] / n};
  const double r = amplitude * std::sqrt(0.5);
  for (int c = 0; c < 2; ++c) {
    f(k, c) += dir[c] * r;
    f({-k[0], -k[1]}, c) += dir[c] * r;
  }
  return f;
}

inline forward::NseParams nse_params(const ExperimentConfig& c, double viscosity, double forcing_amplitude) {
  forward::NseParams p;
  p.viscosity = viscosity;
  p.horizon = c.pde.horizon;
  if (c.pde.forcing.kind != "none" && forcing_amplitude != 0.0) p.forcing = forcing_field(c.pde, forcing_amplitude);
  return p;
}

struct ForwardPair {
  std::shared_ptr<const inference::PdeForward> exact;
  std::shared_ptr<const inference::PdeForward> surrogate;
};

inline ForwardPair build_forwards(const ExperimentConfig& c) {
  ForwardPair fp;
  if (!is_nse(c.kind)) {
    fp.exact = std::make_shared<inference::RdeForward>(c.pde.reaction, c.pde.horizon, c.pde.dt);
  } else {
    fp.exact = std::make_shared<inference::NseForward>(nse_params(c, c.pde.viscosity, c.pde.forcing.amplitude), c.pde.dt);
  }
  const auto& s = c.surrogate;
  if (s.forward == "exact") {
    fp.surrogate = fp.exact;
  } else if (s.forward == "reaction") {
    const auto f = forward::ReactionTerm::bump(s.reaction_amplitude, s.reaction_half_width);
    fp.surrogate = std::make_shared<inference::RdeForward>(f, c.pde.horizon, c.pde.dt);
  } else if (s.forward == "nse_params") {
    fp.surrogate = std::make_shared<inference::NseForward>(nse_params(c, s.viscosity, s.forcing_amplitude), c.pde.dt);
  } else if (s.forward == "oseen") {
    fp.surrogate = std::make_shared<inference::OseenForward>(
        nse_params(c, c.pde.viscosity, c.pde.forcing.amplitude), c.pde.dt, s.oseen);
  } else {
    throw ConfigError("unknown surrogate forward '" + s.forward + "'");
  }
  return fp;
}

inline observation::DesignSpec design_spec(const ExperimentConfig& c) {
  observation::DesignSpec d;
  d.kind = c.data.design;
  d.horizon = c.pde.horizon;
  d.dim = c.pde.dim;
  if (d.kind == observation::DesignKind::uniform_time_fixed_sensors)
    d.sensors = observation::equispaced_sensors(c.pde.dim, c.data.sensors);
  return d;
}

/// True noise law for a seed; per-sensor variances are drawn once per seed.
inline observation::NoiseModel noise_model(const ExperimentConfig& c, std::uint64_t seed) {
  observation::NoiseModel m;
  m.kind = c.data.noise;
  m.rule = c.data.rule;
  m.sigma2 = c.data.sigma2;
  m.sigma2_min = c.data.sigma2 * c.data.spread_lo;
  m.sigma2_max = c.data.sigma2 * c.data.spread_hi;
  if (m.rule == observation::VarianceRule::per_sensor)
    m.sensor_sigma2 = observation::draw_sensor_variances(c.data.sensors, c.data.sigma2, derive_key(seed, "sensors"),
                                                         c.data.spread_lo, c.data.spread_hi);
  return m;
}

/// MM2 sup-grid gaps for the configured probes and radii. They do not depend
/// on N; thresholds are attached per N by model_reports.
struct ModelGaps {
  std::vector<diagnostics::ConditionReport> reports;  // thresholds for N = 2
};

inline ModelGaps measure_model_gaps(const ExperimentConfig& c, const ForwardPair& fp) {
  auto spec = prior_spec(c, 2.0);
  spec.rescale = 0.0;
  const priors::PriorBasis basis(spec);
  const auto probes = diagnostics::model_probes(basis, c.diagnostics.model_probes, derive_key(c.truth.seed, "probes"),
                                                c.prior.beta, regularity_flavor(c));
  ModelGaps g;
  if (fp.surrogate == fp.exact) {
    for (double m : c.diagnostics.model_radii)
      g.reports.push_back(diagnostics::make_report("MM2", 0.0, "<=", 1.0,
                                                   {{"radius", m}, {"probes", probes.directions.size()},
                                                    {"identical", true}}));
    return g;
  }
  g.reports = diagnostics::check_model_condition(*fp.exact, *fp.surrogate, probes, c.diagnostics.model_radii, 2.0, 1.0, 1.0);
  return g;
}

inline std::vector<diagnostics::ConditionReport> model_reports(const ExperimentConfig& c, const ModelGaps& g, double n) {
  const double dn = delta_n(c, n);
  const double cm = c.diagnostics.c_model > 0.0 ? c.diagnostics.c_model : diagnostics::default_constant(n);
  std::vector<diagnostics::ConditionReport> out;
  for (const auto& r : g.reports) {
    auto ctx = r.context;
    ctx["N"] = n;
    ctx["delta_N"] = dn;
    ctx["C_model"] = cm;
    const double radius = ctx.value("radius", 0.0);
    out.push_back(diagnostics::make_report("MM2[r=" + format_number(radius) + "]", r.measured, "<=", cm * dn * dn, ctx));
  }
  return out;
}

struct CellContext {
  const ExperimentConfig* config = nullptr;
  const ForwardPair* forwards = nullptr;
  const ModelGaps* gaps = nullptr;
  observation::DesignSpec design;
};

/// Surrogate variances for a dataset: true sigma_i^2, or per-sensor sample
/// variances from an auxiliary panel (optionally inflated).
inline std::vector<double> surrogate_variances(const ExperimentConfig& c, const observation::Dataset& ds,
                                               const forward::Trajectory& traj,
                                               const observation::NoiseModel& noise, std::uint64_t seed) {
  if (c.surrogate.variances == VarianceSource::exact) return ds.true_sigma2();
  std::vector<double> sensor_sigma2 = noise.sensor_sigma2;
  if (sensor_sigma2.empty()) sensor_sigma2.assign(ds.design.sensors.size(), noise.sigma2);
  const auto panel = observation::generate_panel(traj, ds.design.sensors, c.surrogate.panel_window,
                                                 c.surrogate.panel_points, sensor_sigma2, c.data.noise,
                                                 derive_key(seed, "panel"));
  auto s2 = observation::variance_proxy(panel).s2;
  if (c.surrogate.inflate > 0.0) s2 = observation::inflate_proxy(std::move(s2), c.surrogate.panel_points, c.surrogate.inflate);
  return observation::proxy_assignment(ds, s2);
}

/// One (N, seed) cell. Stage failures are recorded and leave NaN metrics;
/// they never propagate.
inline CellOutput run_cell(const CellContext& ctx, long n, long seed) {
  const auto& c = *ctx.config;
  const auto t0 = std::chrono::steady_clock::now();
  CellOutput out;
  out.row.experiment = c.name;
  out.row.N = n;
  out.row.seed = seed;
  std::string stage = "setup";
  const auto useed = static_cast<std::uint64_t>(seed);
  try {
    const priors::PriorBasis basis(prior_spec(c, double(n)));
    const double dn = delta_n(c, double(n));

    stage = "truth";
    const auto theta0 = truth_field(c, useed);
    const auto traj = ctx.forwards->exact->solve(theta0);

    stage = "data";
    const auto noise = noise_model(c, useed);
    // Datasets share one stream per seed, so smaller N are prefixes of larger ones.
    const auto ds = observation::generate_dataset(traj, std::size_t(n), noise, ctx.design, derive_key(useed, "data"));
    const auto variances = surrogate_variances(c, ds, traj, noise, useed);

    stage = "conditions";
    out.conditions = diagnostics::check_noise_condition(ds.true_sigma2(), variances, double(n), dn, c.surrogate.floor,
                                                        c.diagnostics.c_noise);
    out.row.nm1 = diagnostics::find_report(out.conditions, "NM1")->satisfied;
    out.row.nm2 = diagnostics::nm2_satisfied(out.conditions);
    out.row.mm2 = true;
    for (auto& r : model_reports(c, *ctx.gaps, double(n))) {
      out.row.mm2 = out.row.mm2 && r.satisfied;
      out.conditions.push_back(std::move(r));
    }

    stage = "likelihood";
    const inference::Likelihood lik(ds, ctx.forwards->surrogate, variances, c.surrogate.floor);

    std::vector<double> init;
    stage = "map";
    try {
      auto opt = c.map;
      opt.seed = derive_key(useed, "map", {std::uint64_t(n)});
      const auto m = inference::tikhonov_map(lik, basis, dn, opt);
      out.row.l2_map = spectral::l2_norm(m.theta_hat - theta0);
      if (c.sampler.init_at_map) init = m.coeffs;
    } catch (const std::exception& e) {
      out.failures.push_back({stage, e.what()});
    }

    stage = "pcn";
    auto popt = c.sampler.pcn;
    popt.seed = derive_key(useed, "pcn", {std::uint64_t(n)});
    const auto chain = inference::pcn_chain(lik, basis, popt, init);
    const auto mean = inference::posterior_mean(chain, basis);
    out.row.accept_rate = chain.accept_rate;
    out.row.l2_mean = spectral::l2_norm(mean - theta0);

    stage = "forward_error";
    out.row.d_g_mean =
        inference::forward_distance(*ctx.forwards->exact, mean, theta0, ctx.design, c.diagnostics.quadrature, c.truth.seed).d();
  } catch (const std::exception& e) {
    out.failures.push_back({stage, e.what()});
  }
  if (c.output.record_runtime)
    out.row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct RunOptions {
  long seed_offset = 0;
  /// 0 reads TORUSINV_WORKERS (default 1).
  int workers = 0;
  /// Overrides output.directory when non-empty.
  std::string output_directory;
  std::function<void(const CellOutput&)> on_cell;
  /// Replaces the forward maps built from the config.
  std::function<ForwardPair(const ExperimentConfig&)> forwards;
};

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TORUSINV_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("TORUSINV_WORKERS must be a positive integer");
    return int(v);
  }
  return 1;
}

struct RunResult {
  std::vector<CellOutput> cells;
  nlohmann::json summary;
  std::string results_path, conditions_path, summary_path;
};

inline nlohmann::json build_summary(const ExperimentConfig& c, const std::vector<CellOutput>& cells,
                                    const ModelGaps& gaps, long seed_offset) {
  std::vector<ResultRow> rows;
  for (const auto& cell : cells) rows.push_back(cell.row);
  nlohmann::json s;
  s["experiment"] = c.name;
  s["kind"] = to_string(c.kind);
  s["Ns"] = c.Ns;
  std::vector<long> seeds;
  for (int k = 0; k < c.seeds; ++k) seeds.push_back(seed_offset + k);
  s["seeds"] = seeds;
  s["alpha"] = c.prior.alpha;
  s["beta"] = c.prior.beta;
  s["kappa"] = c.prior.kappa;
  s["dim"] = c.pde.dim;
  s["reference_slope"] = reference_slope(c);
  s["forward_reference_slope"] = -(c.prior.alpha + c.prior.kappa) / (2.0 * (c.prior.alpha + c.prior.kappa) + c.pde.dim);
  nlohmann::json dn = nlohmann::json::array();
  for (long n : c.Ns) dn.push_back({{"N", n}, {"delta_N", delta_n(c, double(n))}});
  s["delta_N"] = dn;
  s["rate"] = rate_json(rows, "l2_mean");
  s["rate_map"] = rate_json(rows, "l2_map");
  s["rate_forward"] = rate_json(rows, "d_g_mean");
  nlohmann::json per_n = nlohmann::json::array();
  for (const auto& ns : summarize_by_n(rows)) per_n.push_back(to_json(ns));
  s["by_N"] = per_n;
  nlohmann::json mm = nlohmann::json::array();
  for (const auto& r : gaps.reports) mm.push_back({{"radius", r.context.value("radius", 0.0)}, {"sup_gap", r.measured}});
  s["model_gaps"] = mm;
  nlohmann::json fails = nlohmann::json::array();
  for (const auto& cell : cells)
    for (const auto& f : cell.failures)
      fails.push_back({{"N", cell.row.N}, {"seed", cell.row.seed}, {"stage", f.stage}, {"message", f.message}});
  s["failures"] = fails;
  s["cells"] = cells.size();
  s["config"] = c.source;
  return s;
}

/// Run every (N, seed) cell on a worker pool and write results.csv,
/// conditions.csv and summary.json into the output directory.
inline RunResult run_experiment(const ExperimentConfig& c, const RunOptions& ro = {}) {
  namespace fs = std::filesystem;
  const std::string dir = ro.output_directory.empty() ? c.output.directory : ro.output_directory;
  fs::create_directories(dir);
  RunResult res;
  res.results_path = (fs::path(dir) / "results.csv").string();
  res.conditions_path = (fs::path(dir) / "conditions.csv").string();
  res.summary_path = (fs::path(dir) / "summary.json").string();

  const auto forwards = ro.forwards ? ro.forwards(c) : build_forwards(c);
  ModelGaps gaps;
  std::string gap_error;
  try {
    gaps = measure_model_gaps(c, forwards);
  } catch (const std::exception& e) {
    gap_error = e.what();
    for (double m : c.diagnostics.model_radii)
      gaps.reports.push_back(diagnostics::make_report("MM2", INFINITY, "<=", 1.0, {{"radius", m}, {"error", gap_error}}));
  }
  CellContext ctx{&c, &forwards, &gaps, design_spec(c)};

  std::vector<std::pair<long, long>> cells;
  for (long n : c.Ns)
    for (int k = 0; k < c.seeds; ++k) cells.emplace_back(n, ro.seed_offset + k);
  res.cells.resize(cells.size());

  OrderedAppender appender(res.results_path, res.conditions_path);
  std::atomic<std::size_t> next{0};
  std::mutex cb_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      CellOutput out;
      try {
        out = run_cell(ctx, cells[i].first, cells[i].second);
      } catch (const std::exception& e) {
        out.row.experiment = c.name;
        out.row.N = cells[i].first;
        out.row.seed = cells[i].second;
        out.failures.push_back({"cell", e.what()});
      }
      if (!gap_error.empty()) out.failures.push_back({"model_gaps", gap_error});
      res.cells[i] = out;
      if (ro.on_cell) {
        std::lock_guard lock(cb_mu);
        ro.on_cell(out);
      }
      appender.submit(i, std::move(out));
    }
  };
  const int workers = std::min<int>(worker_count(ro.workers), int(cells.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  res.summary = build_summary(c, res.cells, gaps, ro.seed_offset);
  std::ofstream(res.summary_path) << res.summary.dump(2) << '\n';
  return res;
}

inline RunResult run_experiment(const std::string& config_path, const RunOptions& ro = {}) {
  return run_experiment(load_config(config_path), ro);
}

}  // namespace torusinv::expcli
