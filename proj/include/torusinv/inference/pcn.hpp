#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "torusinv/inference/likelihood.hpp"

namespace torusinv::inference {

struct PcnOptions {
  double beta = 0.2;
  int steps = 2000;
  int burn_in = 500;
  int thinning = 1;
  std::uint64_t seed = 0;
  bool adapt = true;
  int adapt_window = 50;
  double adapt_gain = 1.0;
  double target_accept = 0.25;

  void validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("pCN beta must lie in [0, 1]");
    if (steps < 1) throw ConfigError("pCN needs at least one step");
    if (burn_in < 0 || burn_in >= steps) throw ConfigError("pCN burn_in must lie in [0, steps)");
    if (thinning < 1) throw ConfigError("pCN thinning must be >= 1");
    if (adapt_window < 1) throw ConfigError("pCN adapt_window must be >= 1");
  }
};

/// Retained samples are the post-burn-in states at every `thinning`-th step.
/// trace_* hold one entry per step.
struct Chain {
  std::vector<std::vector<double>> samples;
  std::vector<double> log_liks;
  std::vector<double> trace_log_lik;
  std::vector<unsigned char> trace_accepted;
  double accept_rate = 0.0;
  double beta = 0.0;
  double initial_beta = 0.0;
  std::uint64_t seed = 0;
  int steps = 0;
  int burn_in = 0;
  int thinning = 1;
  int accepted = 0;
  int proposals = 0;
  int failures = 0;

  std::size_t size() const noexcept { return samples.size(); }
  std::size_t dim() const noexcept { return samples.empty() ? 0 : samples.front().size(); }
  double failure_fraction() const { return steps > 0 ? double(failures) / steps : 0.0; }
};

/// pCN on sieve coefficients: c' = sqrt(1 - beta^2) c + beta xi with xi a
/// prior draw. During burn-in beta adapts every window by
/// beta <- beta exp(gain (acc - target)), clamped to [1e-3, 1].
/// Proposals whose likelihood throws a solver, numeric or convergence error,
/// or evaluates non-finite, are rejected and tallied.
template <class LogLik>
Chain pcn_chain(const priors::PriorBasis& basis, LogLik&& loglik, const PcnOptions& opt,
                std::vector<double> init = {}) {
  opt.validate();
  const std::size_t d = basis.size();
  if (init.empty()) init.assign(d, 0.0);
  if (init.size() != d) throw PreconditionError("pCN initial state has the wrong dimension");
  const auto& sd = basis.std_devs();

  Chain ch;
  ch.seed = opt.seed;
  ch.steps = opt.steps;
  ch.burn_in = opt.burn_in;
  ch.thinning = opt.thinning;
  ch.initial_beta = opt.beta;
  ch.trace_log_lik.reserve(static_cast<std::size_t>(opt.steps));
  ch.trace_accepted.reserve(static_cast<std::size_t>(opt.steps));

  std::vector<double> state = std::move(init);
  double ll = loglik(std::as_const(state));
  if (!std::isfinite(ll)) throw NumericError("pCN initial state has non-finite log-likelihood");

  double beta = opt.beta;
  int window_acc = 0, window_n = 0;
  std::vector<double> prop(d);
  for (int s = 0; s < opt.steps; ++s) {
    const double rho = std::sqrt(std::max(0.0, 1.0 - beta * beta));
    const auto key = derive_key(opt.seed, "pcn", {static_cast<std::uint64_t>(s)});
    for (std::size_t j = 0; j < d; ++j) prop[j] = rho * state[j] + beta * sd[j] * normal_at(key, j);

    double ll_prop = -std::numeric_limits<double>::infinity();
    bool failed = false;
    try {
      ll_prop = loglik(std::as_const(prop));
      failed = !std::isfinite(ll_prop);
    } catch (const SolverDivergence&) {
      failed = true;
    } catch (const NumericError&) {
      failed = true;
    } catch (const ConvergenceError&) {
      failed = true;
    }
    bool accept = false;
    if (failed) {
      ++ch.failures;
    } else {
      const double u = uniform_at(derive_key(opt.seed, "pcn-accept", {static_cast<std::uint64_t>(s)}), 0);
      accept = std::log(u) < ll_prop - ll;
    }
    if (accept) {
      state.swap(prop);
      ll = ll_prop;
    }
    ch.trace_log_lik.push_back(ll);
    ch.trace_accepted.push_back(accept ? 1 : 0);

    if (s < opt.burn_in) {
      window_acc += accept;
      if (++window_n == opt.adapt_window) {
        if (opt.adapt && beta > 0.0) {
          const double acc = double(window_acc) / window_n;
          beta = std::clamp(beta * std::exp(opt.adapt_gain * (acc - opt.target_accept)), 1e-3, 1.0);
        }
        window_acc = window_n = 0;
      }
    } else {
      ++ch.proposals;
      ch.accepted += accept;
      if ((s - opt.burn_in + 1) % opt.thinning == 0) {
        ch.samples.push_back(state);
        ch.log_liks.push_back(ll);
      }
    }
  }
  ch.beta = beta;
  ch.accept_rate = ch.proposals > 0 ? double(ch.accepted) / ch.proposals : 0.0;
  return ch;
}

inline Chain pcn_chain(const Likelihood& lik, const priors::PriorBasis& basis,
                       const PcnOptions& opt, std::vector<double> init = {}) {
  return pcn_chain(
      basis, [&](const std::vector<double>& c) { return lik(basis.synthesize(c)); }, opt,
      std::move(init));
}

inline void require_nonempty(const Chain& ch) {
  if (ch.samples.empty()) throw PreconditionError("chain has no retained samples");
}

inline std::vector<double> coefficient_mean(const Chain& ch) {
  require_nonempty(ch);
  std::vector<double> m(ch.dim(), 0.0);
  for (const auto& s : ch.samples)
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += s[j];
  for (auto& v : m) v /= static_cast<double>(ch.size());
  return m;
}

inline SpectralField posterior_mean(const Chain& ch, const priors::PriorBasis& basis) {
  return basis.synthesize(coefficient_mean(ch));
}

/// Pointwise envelopes on the physical grid, one block per component.
struct CredibleBand {
  spectral::PhysicalField lower;
  spectral::PhysicalField upper;
  double level = 0.0;
};

/// Inverse-ECDF quantile: the ceil(n p)-th order statistic (first for p = 0).
inline double ecdf_quantile(std::vector<double>& v, double p) {
  const auto n = v.size();
  std::size_t r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  r = std::clamp<std::size_t>(r, 1, n) - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(r), v.end());
  return v[r];
}

inline CredibleBand credible_band(const Chain& ch, const priors::PriorBasis& basis, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("credible level must lie in (0, 1)");
  require_nonempty(ch);
  std::vector<spectral::PhysicalField> fields;
  fields.reserve(ch.size());
  for (const auto& s : ch.samples) fields.push_back(spectral::to_physical(basis.synthesize(s)));
  CredibleBand b{fields.front(), fields.front(), level};
  std::vector<double> col(fields.size());
  for (std::size_t i = 0; i < b.lower.values.size(); ++i) {
    for (std::size_t s = 0; s < fields.size(); ++s) col[s] = fields[s].values[i];
    b.lower.values[i] = ecdf_quantile(col, 0.5 * (1.0 - level));
    b.upper.values[i] = ecdf_quantile(col, 0.5 * (1.0 + level));
  }
  return b;
}

/// Geyer initial positive sequence estimate of the effective sample size.
inline double effective_sample_size(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  auto acov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double g0 = acov(0);
  if (!(g0 > 0.0)) return static_cast<double>(n);
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (acov(2 * m) + acov(2 * m + 1)) / g0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return static_cast<double>(n) / tau;
}

/// Smallest per-coefficient ESS.
inline double effective_sample_size(const Chain& ch) {
  require_nonempty(ch);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> col(ch.size());
  for (std::size_t j = 0; j < ch.dim(); ++j) {
    for (std::size_t s = 0; s < ch.size(); ++s) col[s] = ch.samples[s][j];
    best = std::min(best, effective_sample_size(col));
  }
  return best;
}

// Chain file: one JSON header line, then size x dim float64 (little endian)
// samples followed by size float64 log-likelihoods.

inline void write_chain(const std::string& path, const Chain& ch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write chain file " + path);
  nlohmann::json h = {{"format", "torusinv-chain"}, {"version", 1},
                      {"samples", ch.size()},       {"dim", ch.dim()},
                      {"accept_rate", ch.accept_rate}, {"beta", ch.beta},
                      {"initial_beta", ch.initial_beta}, {"seed", ch.seed},
                      {"steps", ch.steps},           {"burn_in", ch.burn_in},
                      {"thinning", ch.thinning},     {"accepted", ch.accepted},
                      {"proposals", ch.proposals},   {"failures", ch.failures}};
  out << h.dump() << '\n';
  for (const auto& s : ch.samples)
    out.write(reinterpret_cast<const char*>(s.data()), std::streamsize(s.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(ch.log_liks.data()),
            std::streamsize(ch.log_liks.size() * sizeof(double)));
  if (!out) throw ConfigError("failed writing chain file " + path);
}

inline Chain read_chain(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read chain file " + path);
  std::string line;
  std::getline(in, line);
  const auto h = nlohmann::json::parse(line);
  if (h.value("format", "") != "torusinv-chain") throw ConfigError(path + " is not a chain file");
  Chain ch;
  const auto n = h.at("samples").get<std::size_t>();
  const auto d = h.at("dim").get<std::size_t>();
  ch.accept_rate = h.at("accept_rate");
  ch.beta = h.at("beta");
  ch.initial_beta = h.at("initial_beta");
  ch.seed = h.at("seed");
  ch.steps = h.at("steps");
  ch.burn_in = h.at("burn_in");
  ch.thinning = h.at("thinning");
  ch.accepted = h.at("accepted");
  ch.proposals = h.at("proposals");
  ch.failures = h.at("failures");
  ch.samples.assign(n, std::vector<double>(d));
  for (auto& s : ch.samples)
    in.read(reinterpret_cast<char*>(s.data()), std::streamsize(d * sizeof(double)));
  ch.log_liks.resize(n);
  in.read(reinterpret_cast<char*>(ch.log_liks.data()), std::streamsize(n * sizeof(double)));
  if (!in) throw ConfigError("truncated chain file " + path);
  return ch;
}

/// Per-step trace as CSV: step,log_lik,accepted.
inline void write_chain_summary(const std::string& path, const Chain& ch) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write chain summary " + path);
  out << "step,log_lik,accepted\n";
  char buf[64];
  for (std::size_t s = 0; s < ch.trace_log_lik.size(); ++s) {
    std::snprintf(buf, sizeof buf, "%.17g", ch.trace_log_lik[s]);
    out << s << ',' << buf << ',' << int(ch.trace_accepted[s]) << '\n';
  }
}

}  // namespace torusinv::inference
