#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "torusinv/core/rng.hpp"
#include "torusinv/spectral.hpp"

namespace torusinv::priors {

using spectral::SpectralField;
using spectral::Wavevector;

enum class BasisKind { torus_scalar, stokes_divfree };

inline BasisKind parse_basis(const std::string& s) {
  if (s == "torus_scalar") return BasisKind::torus_scalar;
  if (s == "stokes_divfree") return BasisKind::stokes_divfree;
  throw ConfigError("unknown prior basis '" + s + "' (expected torus_scalar or stokes_divfree)");
}

inline std::string to_string(BasisKind b) {
  return b == BasisKind::torus_scalar ? "torus_scalar" : "stokes_divfree";
}

/// Gaussian sieve prior sum_{j<=D} lambda_j^{-alpha/2} g_j e_j, divided by
/// sqrt(rescale) when rescale > 0. sieve_dim = 0 selects the default rule.
struct PriorSpec {
  double alpha = 2.0;
  int sieve_dim = 0;
  BasisKind basis = BasisKind::torus_scalar;
  double rescale = 0.0;
  int dim = 1;
  int resolution = 32;
  spectral::Eigenweight eigenweight = spectral::Eigenweight::four_pi_squared;

  int components() const { return basis == BasisKind::stokes_divfree ? 2 : 1; }
};

enum class Parity { cos, sin };

/// sqrt(2) cos(2 pi k.x) v or sqrt(2) sin(2 pi k.x) v, with v = 1 for scalar
/// fields and v = (k_2, -k_1)/|k| for the Stokes basis. k is the canonical
/// representative of {k, -k} (k_0 > 0, or k_0 = 0 and k_1 > 0).
struct BasisElement {
  Wavevector k{0, 0};
  Parity parity = Parity::cos;
  std::array<double, 2> direction{1.0, 0.0};
  double lambda = 0.0;
  /// Index of k among representatives (shared by the cos/sin pair).
  int pair = 0;
};

inline bool canonical(const Wavevector& k) { return k[0] > 0 || (k[0] == 0 && k[1] > 0); }

/// Basis elements available at a resolution, in mode-enumeration order of
/// first appearance of {k, -k}, cos before sin. Only wavevectors inside the
/// dealiasing region are used.
inline std::vector<BasisElement> available_elements(int dim, int resolution, BasisKind kind,
                                                    spectral::Eigenweight w) {
  if (kind == BasisKind::stokes_divfree && dim != 2)
    throw ConfigError("stokes_divfree basis needs d = 2");
  std::vector<BasisElement> out;
  std::set<Wavevector> seen;
  int pair = 0;
  for (const auto& m : spectral::mode_table(dim, resolution, w)) {
    if (m.norm2() == 0 || !spectral::inside_dealias(m.k, resolution)) continue;
    const Wavevector rep = canonical(m.k) ? m.k : Wavevector{-m.k[0], -m.k[1]};
    if (!seen.insert(rep).second) continue;
    std::array<double, 2> dir{1.0, 0.0};
    if (kind == BasisKind::stokes_divfree) {
      const double n = std::hypot(rep[0], rep[1]);
      dir = {rep[1] / n, -rep[0] / n};
    }
    out.push_back({rep, Parity::cos, dir, m.lambda, pair});
    out.push_back({rep, Parity::sin, dir, m.lambda, pair});
    ++pair;
  }
  return out;
}

/// Largest j with lambda_j^{-alpha} >= 1e-8 lambda_1^{-alpha}, capped by capacity.
inline int default_sieve_dim(const std::vector<BasisElement>& elems, double alpha) {
  if (elems.empty()) return 0;
  const double floor = 1e-8 * std::pow(elems.front().lambda, -alpha);
  int d = 0;
  for (const auto& e : elems)
    if (std::pow(e.lambda, -alpha) >= floor) ++d;
  return d;
}

inline double coefficient_scale(const PriorSpec& s) {
  return s.rescale > 0.0 ? 1.0 / std::sqrt(s.rescale) : 1.0;
}

/// The retained basis e_1..e_D with synthesis and projection.
class PriorBasis {
 public:
  explicit PriorBasis(const PriorSpec& spec) : spec_(spec) {
    spectral::check_resolution(spec.dim, spec.resolution);
    if (!(spec.alpha > 0.5 * spec.dim) || !std::isfinite(spec.alpha))
      throw ConfigError("prior alpha must exceed d/2 (got " + std::to_string(spec.alpha) + ")");
    if (spec.rescale < 0.0 || !std::isfinite(spec.rescale))
      throw ConfigError("prior rescale must be >= 0");
    if (spec.sieve_dim < 0) throw ConfigError("sieve_dim must be >= 0");
    auto all = available_elements(spec.dim, spec.resolution, spec.basis, spec.eigenweight);
    const int capacity = static_cast<int>(all.size());
    int d = spec.sieve_dim == 0 ? default_sieve_dim(all, spec.alpha) : spec.sieve_dim;
    if (d > capacity)
      throw ConfigError("sieve_dim " + std::to_string(d) + " exceeds the " +
                        std::to_string(capacity) + " basis elements available at M=" +
                        std::to_string(spec.resolution));
    all.resize(static_cast<std::size_t>(d));
    elements_ = std::move(all);
    const double scale = coefficient_scale(spec);
    for (const auto& e : elements_) std_devs_.push_back(scale * std::pow(e.lambda, -0.5 * spec.alpha));
  }

  const PriorSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const std::vector<BasisElement>& elements() const noexcept { return elements_; }
  /// lambda_j^{-alpha/2} / sqrt(rescale) per retained element.
  const std::vector<double>& std_devs() const noexcept { return std_devs_; }

  SpectralField zero_field() const {
    return SpectralField(spec_.dim, spec_.resolution, spec_.components());
  }

  SpectralField synthesize(std::span<const double> coeffs) const {
    require_size(coeffs.size());
    SpectralField u = zero_field();
    const double r = std::sqrt(0.5);
    for (std::size_t j = 0; j < elements_.size(); ++j) {
      const auto& e = elements_[j];
      const spectral::Complex z =
          e.parity == Parity::cos ? spectral::Complex{r * coeffs[j], 0.0}
                                  : spectral::Complex{0.0, -r * coeffs[j]};
      const Wavevector neg{-e.k[0], -e.k[1]};
      for (int c = 0; c < spec_.components(); ++c) {
        u(e.k, c) += e.direction[c] * z;
        u(neg, c) += e.direction[c] * std::conj(z);
      }
    }
    return u;
  }

  /// L^2 coefficients <u, e_j>.
  std::vector<double> project(const SpectralField& u) const {
    require_field(u);
    std::vector<double> out(elements_.size());
    const double r = std::sqrt(2.0);
    for (std::size_t j = 0; j < elements_.size(); ++j) {
      const auto& e = elements_[j];
      spectral::Complex z{0.0, 0.0};
      for (int c = 0; c < spec_.components(); ++c) z += e.direction[c] * u(e.k, c);
      out[j] = e.parity == Parity::cos ? r * z.real() : -r * z.imag();
    }
    return out;
  }

  /// Relative L^2 size of the part of u outside span{e_1..e_D}.
  double residual(const SpectralField& u) const {
    const double total = spectral::l2_norm(u);
    if (total == 0.0) return 0.0;
    return spectral::l2_norm(u - synthesize(project(u))) / total;
  }

  void require_field(const SpectralField& u) const {
    if (u.dim() != spec_.dim || u.resolution() != spec_.resolution ||
        u.components() != spec_.components())
      throw PreconditionError("field shape does not match the prior basis");
  }

 private:
  void require_size(std::size_t n) const {
    if (n != elements_.size())
      throw PreconditionError("expected " + std::to_string(elements_.size()) +
                              " coefficients, got " + std::to_string(n));
  }

  PriorSpec spec_;
  std::vector<BasisElement> elements_;
  std::vector<double> std_devs_;
};

/// Standard normal g_j for a seed; keyed by (seed, pair, parity) so draws do
/// not depend on evaluation order or D.
inline double prior_normal(std::uint64_t seed, const BasisElement& e) {
  return normal_at(derive_key(seed, "prior", {static_cast<std::uint64_t>(e.pair),
                                              static_cast<std::uint64_t>(e.parity)}),
                   0);
}

inline std::vector<double> sample_coefficients(const PriorBasis& basis, std::uint64_t seed) {
  std::vector<double> c(basis.size());
  for (std::size_t j = 0; j < c.size(); ++j)
    c[j] = basis.std_devs()[j] * prior_normal(seed, basis.elements()[j]);
  return c;
}

inline SpectralField sample_prior(const PriorBasis& basis, std::uint64_t seed) {
  return basis.synthesize(sample_coefficients(basis, seed));
}

inline SpectralField sample_prior(const PriorSpec& spec, std::uint64_t seed) {
  return sample_prior(PriorBasis(spec), seed);
}

/// ||theta||_H^2 = rescale * sum lambda_j^alpha <theta, e_j>^2 (rescale = 1
/// when 0); +infinity if theta has content outside the sieve.
inline double rkhs_norm_squared(const SpectralField& theta, const PriorBasis& basis) {
  basis.require_field(theta);
  spectral::require_finite(theta, "rkhs_norm");
  if (basis.spec().basis == BasisKind::stokes_divfree &&
      spectral::max_divergence(theta) > 1e-10 * std::max(1.0, spectral::l2_norm(theta)))
    throw PreconditionError("rkhs_norm: field is not divergence-free");
  if (basis.residual(theta) > 1e-12) return std::numeric_limits<double>::infinity();
  const auto c = basis.project(theta);
  const double scale = basis.spec().rescale > 0.0 ? basis.spec().rescale : 1.0;
  double total = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j)
    total += std::pow(basis.elements()[j].lambda, basis.spec().alpha) * c[j] * c[j];
  return scale * total;
}

inline double rkhs_norm(const SpectralField& theta, const PriorBasis& basis) {
  return std::sqrt(rkhs_norm_squared(theta, basis));
}

inline double rkhs_norm(const SpectralField& theta, const PriorSpec& spec) {
  return rkhs_norm(theta, PriorBasis(spec));
}

/// delta_N = N^{-(alpha + kappa) / (2 alpha + 2 kappa + d)}.
inline double contraction_rate(double alpha, double kappa, int d, double n) {
  if (!(alpha > 0.0) || !(n > 0.0) || kappa < 0.0 || d < 1)
    throw ConfigError("contraction_rate needs alpha, N > 0, kappa >= 0, d >= 1");
  return std::pow(n, -(alpha + kappa) / (2.0 * alpha + 2.0 * kappa + d));
}

/// N delta_N^2, the rescaling factor used by the "auto" rescale mode.
inline double auto_rescale(double alpha, double kappa, int d, double n) {
  const double r = contraction_rate(alpha, kappa, d, n);
  return n * r * r;
}

struct TailProbe {
  double exceedance = 0.0;
  double std_error = 0.0;
  /// exp(-c M^2 rescale) for the supplied c (rescale taken as 1 when 0).
  double reference = 0.0;
  int samples = 0;
};

/// Monte-Carlo estimate of Pi(||theta||_{H^beta} > radius).
inline TailProbe prior_tail_probe(const PriorBasis& basis, double beta, double radius, int samples,
                                  std::uint64_t seed, double c = 1.0,
                                  spectral::SobolevFlavor flavor = spectral::SobolevFlavor::inhomogeneous) {
  if (samples < 100) throw ConfigError("prior_tail_probe needs at least 100 samples");
  int hits = 0;
  for (int s = 0; s < samples; ++s) {
    const auto theta = sample_prior(basis, derive_key(seed, "tail", {static_cast<std::uint64_t>(s)}));
    if (spectral::sobolev_norm(theta, beta, flavor, basis.spec().eigenweight) > radius) ++hits;
  }
  TailProbe p;
  p.samples = samples;
  p.exceedance = static_cast<double>(hits) / samples;
  p.std_error = std::sqrt(p.exceedance * (1.0 - p.exceedance) / samples);
  const double r = basis.spec().rescale > 0.0 ? basis.spec().rescale : 1.0;
  p.reference = std::exp(-c * radius * radius * r);
  return p;
}

}  // namespace torusinv::priors
