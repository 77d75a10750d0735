#pragma once

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <exception>
#include <mutex>
#include <utility>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusinv/inference/likelihood.hpp"
#include "torusinv/spectral/serialize.hpp"

namespace torusinv::inference {

struct OptimizerConfig {
  int starts = 5;
  int max_iterations = 400;
  double grad_tol = 1e-6;
  /// A stalled line search still counts as converged when the gradient norm
  /// is within this factor of grad_tol.
  double stall_factor = 100.0;
  double fd_step = 1e-5;
  double initial_step = 0.1;
  double line_tol = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (starts < 1) throw ConfigError("optimizer needs at least one start");
    if (max_iterations < 1) throw ConfigError("optimizer max_iterations must be >= 1");
    if (!(grad_tol > 0.0) || !(fd_step > 0.0)) throw ConfigError("optimizer tolerances must be > 0");
  }
};

struct MapResult {
  SpectralField theta_hat;
  std::vector<double> coeffs;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  double d_delta2 = 0.0;
  bool converged = false;
  int best_start = 0;
  std::vector<double> start_objectives;
};

/// Base (unrescaled) penalty weights lambda_j^alpha, so that
/// ||theta||_H^2 = sum_j w_j c_j^2 for theta in the sieve span.
inline std::vector<double> penalty_weights(const priors::PriorBasis& basis) {
  std::vector<double> w;
  w.reserve(basis.size());
  for (const auto& e : basis.elements()) w.push_back(std::pow(e.lambda, basis.spec().alpha));
  return w;
}

inline double base_rkhs_norm_squared(const std::vector<double>& c, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += w[j] * c[j] * c[j];
  return s;
}

/// J[theta] = -(2N)^{-1} sum_i v_i^{-1} ||y_i - G(theta)(Z_i)||^2 - (delta^2/2) ||theta||_H^2
/// over sieve coefficients.
class TikhonovFunctional {
 public:
  TikhonovFunctional(const Likelihood& lik, const priors::PriorBasis& basis, double delta)
      : lik_(&lik), basis_(&basis), delta_(delta), w_(penalty_weights(basis)) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("Tikhonov delta must be > 0");
  }

  double operator()(const std::vector<double>& c) const {
    const double n = static_cast<double>(lik_->dataset().size());
    return (*lik_)(basis_->synthesize(c)) / n - 0.5 * delta_ * delta_ * base_rkhs_norm_squared(c, w_);
  }
  double at(const SpectralField& theta) const { return (*this)(basis_->project(theta)); }

  double delta() const noexcept { return delta_; }
  const std::vector<double>& weights() const noexcept { return w_; }
  const priors::PriorBasis& basis() const noexcept { return *basis_; }

 private:
  const Likelihood* lik_;
  const priors::PriorBasis* basis_;
  double delta_;
  std::vector<double> w_;
};

namespace detail {

// GSL minimizes f(z) = -J(c) in whitened coordinates z_j = c_j sqrt(w_j).
struct MapProblem {
  const TikhonovFunctional* J;
  std::vector<double> scale;  // c_j = scale_j z_j
  double fd_step;
  std::vector<double> c;
  bool failed = false;
  // Unexpected exceptions must not unwind through GSL's C frames; they are
  // held here and rethrown once the minimizer returns.
  std::exception_ptr error;

  double value(const gsl_vector* z) {
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = scale[j] * gsl_vector_get(z, j);
    try {
      const double v = -(*J)(c);
      if (std::isfinite(v)) return v;
    } catch (const SolverDivergence&) {
    } catch (const NumericError&) {
    } catch (const ConvergenceError&) {
    } catch (...) {
      if (!error) error = std::current_exception();
    }
    return GSL_POSINF;
  }

  void gradient(const gsl_vector* z, gsl_vector* g) {
    gsl_vector* zz = gsl_vector_alloc(z->size);
    gsl_vector_memcpy(zz, z);
    for (std::size_t j = 0; j < z->size; ++j) {
      const double zj = gsl_vector_get(z, j);
      const double h = fd_step * (1.0 + std::abs(zj));
      gsl_vector_set(zz, j, zj + h);
      const double fp = value(zz);
      gsl_vector_set(zz, j, zj - h);
      const double fm = value(zz);
      gsl_vector_set(zz, j, zj);
      const double gj = (fp - fm) / (2.0 * h);
      if (!std::isfinite(gj)) failed = true;
      gsl_vector_set(g, j, std::isfinite(gj) ? gj : 0.0);
    }
    gsl_vector_free(zz);
  }

  static double f(const gsl_vector* z, void* p) { return static_cast<MapProblem*>(p)->value(z); }
  static void df(const gsl_vector* z, void* p, gsl_vector* g) {
    static_cast<MapProblem*>(p)->gradient(z, g);
  }
  static void fdf(const gsl_vector* z, void* p, double* fz, gsl_vector* g) {
    *fz = f(z, p);
    df(z, p, g);
  }
};

struct StartOutcome {
  std::vector<double> z;
  double f = GSL_POSINF;
  double grad_norm = GSL_POSINF;
  int iterations = 0;
  bool converged = false;
};

inline StartOutcome run_start(MapProblem& prob, std::vector<double> z0, const OptimizerConfig& opt) {
  const std::size_t d = z0.size();
  StartOutcome out;
  // GSL's handler is process-global; disable it once rather than per start so
  // concurrent optimizations never observe the aborting default.
  static std::once_flag gsl_quiet;
  std::call_once(gsl_quiet, [] { gsl_set_error_handler_off(); });
  gsl_vector* x = gsl_vector_alloc(d);
  for (std::size_t j = 0; j < d; ++j) gsl_vector_set(x, j, z0[j]);
  gsl_multimin_function_fdf fn{&MapProblem::f, &MapProblem::df, &MapProblem::fdf, d, &prob};
  gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, d);
  prob.failed = false;
  int status = gsl_multimin_fdfminimizer_set(s, &fn, x, opt.initial_step, opt.line_tol);
  bool stalled = false;
  if (status == GSL_SUCCESS && std::isfinite(s->f)) {
    while (!prob.error && out.iterations < opt.max_iterations) {
      if (gsl_blas_dnrm2(s->gradient) <= opt.grad_tol) break;
      ++out.iterations;
      status = gsl_multimin_fdfminimizer_iterate(s);
      if (status != GSL_SUCCESS) {
        stalled = true;
        break;
      }
    }
    out.f = s->f;
    out.grad_norm = gsl_blas_dnrm2(s->gradient);
    out.z.resize(d);
    for (std::size_t j = 0; j < d; ++j) out.z[j] = gsl_vector_get(s->x, j);
    const double limit = stalled ? opt.stall_factor * opt.grad_tol : opt.grad_tol;
    out.converged = std::isfinite(out.f) && !prob.failed && out.grad_norm <= limit;
  }
  gsl_multimin_fdfminimizer_free(s);
  gsl_vector_free(x);
  if (prob.error) std::rethrow_exception(std::exchange(prob.error, nullptr));
  return out;
}

}  // namespace detail

/// The optimizer's finite-difference gradient of J, mapped back to
/// coefficient space.
inline std::vector<double> tikhonov_gradient(const TikhonovFunctional& J,
                                             const std::vector<double>& c, double fd_step = 1e-5) {
  const std::size_t d = c.size();
  detail::MapProblem prob{&J, {}, fd_step, std::vector<double>(d), false, nullptr};
  for (double w : J.weights()) prob.scale.push_back(1.0 / std::sqrt(w));
  gsl_vector* z = gsl_vector_alloc(d);
  gsl_vector* g = gsl_vector_alloc(d);
  for (std::size_t j = 0; j < d; ++j) gsl_vector_set(z, j, c[j] / prob.scale[j]);
  prob.gradient(z, g);
  std::vector<double> out(d);
  for (std::size_t j = 0; j < d; ++j) out[j] = -gsl_vector_get(g, j) / prob.scale[j];
  gsl_vector_free(z);
  gsl_vector_free(g);
  if (prob.failed) throw NumericError("tikhonov_gradient: non-finite objective near c");
  return out;
}

/// Multi-start quasi-Newton (BFGS) maximization of J with central
/// finite-difference gradients in whitened coordinates. Start 0 is `init`
/// (zero if empty); the rest are base-prior draws.
inline MapResult tikhonov_map(const TikhonovFunctional& J, const OptimizerConfig& opt,
                              std::vector<double> init = {}) {
  opt.validate();
  const auto& basis = J.basis();
  const std::size_t d = basis.size();
  if (init.empty()) init.assign(d, 0.0);
  if (init.size() != d) throw PreconditionError("MAP initial state has the wrong dimension");

  detail::MapProblem prob{&J, {}, opt.fd_step, std::vector<double>(d), false, nullptr};
  for (double w : J.weights()) prob.scale.push_back(1.0 / std::sqrt(w));

  MapResult best;
  detail::StartOutcome winner;
  std::vector<double> trace;
  for (int s = 0; s < opt.starts; ++s) {
    std::vector<double> z0(d);
    if (s == 0) {
      for (std::size_t j = 0; j < d; ++j) z0[j] = init[j] / prob.scale[j];
    } else {
      const auto key = derive_key(opt.seed, "map-start", {static_cast<std::uint64_t>(s)});
      for (std::size_t j = 0; j < d; ++j) z0[j] = normal_at(key, j);
    }
    auto r = detail::run_start(prob, std::move(z0), opt);
    trace.push_back(-r.f);
    if (r.converged && (!winner.converged || r.f < winner.f)) {
      winner = std::move(r);
      best.best_start = s;
    }
  }
  if (!winner.converged)
    throw ConvergenceError("tikhonov_map: no start converged", std::move(trace));

  best.coeffs.resize(d);
  for (std::size_t j = 0; j < d; ++j) best.coeffs[j] = prob.scale[j] * winner.z[j];
  best.theta_hat = basis.synthesize(best.coeffs);
  best.objective = J(best.coeffs);
  best.grad_norm = winner.grad_norm;
  best.iterations = winner.iterations;
  best.d_delta2 = -2.0 * best.objective;
  best.converged = true;
  best.start_objectives = std::move(trace);
  return best;
}

inline MapResult tikhonov_map(const Likelihood& lik, const priors::PriorBasis& basis, double delta,
                              const OptimizerConfig& opt, std::vector<double> init = {}) {
  return tikhonov_map(TikhonovFunctional(lik, basis, delta), opt, std::move(init));
}

inline nlohmann::json to_json(const MapResult& r) {
  return {{"format", "torusinv-map"},
          {"theta_hat", spectral::to_json(r.theta_hat)},
          {"coeffs", r.coeffs},
          {"objective", r.objective},
          {"grad_norm", r.grad_norm},
          {"iterations", r.iterations},
          {"d_delta2", r.d_delta2},
          {"converged", r.converged},
          {"best_start", r.best_start},
          {"start_objectives", r.start_objectives}};
}

inline MapResult map_result_from_json(const nlohmann::json& j) {
  MapResult r;
  r.theta_hat = spectral::field_from_json(j.at("theta_hat"));
  r.coeffs = j.at("coeffs").get<std::vector<double>>();
  r.objective = j.at("objective");
  r.grad_norm = j.at("grad_norm");
  r.iterations = j.at("iterations");
  r.d_delta2 = j.at("d_delta2");
  r.converged = j.at("converged");
  r.best_start = j.value("best_start", 0);
  r.start_objectives = j.value("start_objectives", std::vector<double>{});
  return r;
}

inline void write_map_result(const std::string& path, const MapResult& r) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << to_json(r).dump(1) << '\n';
}

/// S = ||G(theta_hat) - G(theta0)||^2_{L^2_zeta} + delta^2 ||theta_hat||_H^2,
/// rejecting when S >= c1 delta^2 with c1 = c1_factor ||theta0||_H^2.
struct TestStatistic {
  double s_hat = 0.0;
  double fit = 0.0;
  double fit_se = 0.0;
  double penalty = 0.0;
  double c1 = 0.0;
  double threshold = 0.0;
  bool reject = false;
};

inline TestStatistic test_statistic(const ForwardMap& fwd, const SpectralField& theta_hat,
                                    const SpectralField& theta0, const priors::PriorBasis& basis,
                                    double delta, const observation::DesignSpec& design,
                                    int draws = 10000, std::uint64_t seed = 0,
                                    double c1_factor = 10.0) {
  if (!(delta > 0.0)) throw ConfigError("test_statistic needs delta > 0");
  const auto w = penalty_weights(basis);
  TestStatistic t;
  const auto fd = forward_distance(fwd, theta_hat, theta0, design, draws, seed);
  t.fit = fd.d2;
  t.fit_se = fd.se;
  t.penalty = delta * delta * base_rkhs_norm_squared(basis.project(theta_hat), w);
  t.s_hat = t.fit + t.penalty;
  t.c1 = c1_factor * base_rkhs_norm_squared(basis.project(theta0), w);
  t.threshold = t.c1 * delta * delta;
  t.reject = t.s_hat >= t.threshold;
  return t;
}

}  // namespace torusinv::inference
