#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "torusinv/priors.hpp"

using namespace torusinv;
using namespace torusinv::priors;
using spectral::SpectralField;

namespace {

constexpr double kPi = std::numbers::pi;

PriorSpec scalar_spec(int d, int m, double alpha, int D, double rescale = 0.0) {
  PriorSpec s;
  s.alpha = alpha;
  s.sieve_dim = D;
  s.dim = d;
  s.resolution = m;
  s.rescale = rescale;
  return s;
}

PriorSpec stokes_spec(int m, double alpha, int D, double rescale = 0.0) {
  PriorSpec s = scalar_spec(2, m, alpha, D, rescale);
  s.basis = BasisKind::stokes_divfree;
  return s;
}

}  // namespace

TEST(PriorBasis, OrderingAndEigenvalues) {
  const PriorBasis b(scalar_spec(1, 16, 2.0, 6));
  ASSERT_EQ(b.size(), 6u);
  const std::vector<int> ks{1, 1, 2, 2, 3, 3};
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_EQ(b.elements()[j].k[0], ks[j]);
    EXPECT_EQ(b.elements()[j].parity, j % 2 == 0 ? Parity::cos : Parity::sin);
    EXPECT_DOUBLE_EQ(b.elements()[j].lambda, 4 * kPi * kPi * ks[j] * ks[j]);
  }
}

TEST(PriorBasis, SynthesisMatchesPhysicalFormula) {
  const PriorBasis b(scalar_spec(2, 16, 2.0, 10));
  for (std::size_t j = 0; j < b.size(); ++j) {
    std::vector<double> c(b.size(), 0.0);
    c[j] = 1.0;
    const auto f = spectral::to_physical(b.synthesize(c));
    const auto& e = b.elements()[j];
    for (std::size_t i = 0; i < f.points(); i += 5) {
      const auto x = f.point(i);
      const double phase = 2 * kPi * (e.k[0] * x[0] + e.k[1] * x[1]);
      const double expect = std::sqrt(2.0) * (e.parity == Parity::cos ? std::cos(phase) : std::sin(phase));
      EXPECT_NEAR(f.values[i], expect, 1e-13);
    }
  }
}

TEST(PriorBasis, ProjectInvertsSynthesis) {
  for (const auto& spec : {scalar_spec(1, 32, 2.0, 0), scalar_spec(2, 24, 2.5, 40), stokes_spec(24, 3.0, 40)}) {
    const PriorBasis b(spec);
    std::vector<double> c(b.size());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = std::sin(1.0 + 0.7 * j);
    const auto back = b.project(b.synthesize(c));
    for (std::size_t j = 0; j < c.size(); ++j) EXPECT_NEAR(back[j], c[j], 1e-14);
    EXPECT_LE(b.residual(b.synthesize(c)), 1e-14);
  }
}

TEST(PriorBasis, StokesGramMatrixIsIdentity) {
  const PriorBasis b(stokes_spec(16, 3.0, 24));
  std::vector<SpectralField> e;
  for (std::size_t j = 0; j < b.size(); ++j) {
    std::vector<double> c(b.size(), 0.0);
    c[j] = 1.0;
    e.push_back(b.synthesize(c));
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_LE(spectral::max_divergence(e[i]), 1e-15);
    EXPECT_EQ(e[i]({0, 0}, 0), spectral::Complex(0.0, 0.0));
    for (std::size_t j = 0; j < e.size(); ++j) {
      // Brute-force Gram entries on the grid.
      const auto fi = spectral::to_physical(e[i]), fj = spectral::to_physical(e[j]);
      double g = 0.0;
      for (std::size_t p = 0; p < fi.values.size(); ++p) g += fi.values[p] * fj.values[p];
      g /= static_cast<double>(fi.points());
      EXPECT_NEAR(g, i == j ? 1.0 : 0.0, 1e-13) << i << "," << j;
    }
  }
}

TEST(PriorBasis, CapacityAndValidation) {
  // M = 12: dealias cutoff 4, so 4 scalar pairs in 1D.
  EXPECT_EQ(PriorBasis(scalar_spec(1, 12, 2.0, 8)).size(), 8u);
  EXPECT_THROW(PriorBasis(scalar_spec(1, 12, 2.0, 9)), ConfigError);
  EXPECT_THROW(PriorBasis(scalar_spec(1, 12, 0.4, 2)), ConfigError);
  EXPECT_THROW(PriorBasis(scalar_spec(2, 12, 1.0, 2)), ConfigError);
  EXPECT_THROW(PriorBasis(scalar_spec(1, 12, 2.0, 2, -1.0)), ConfigError);
  PriorSpec bad = stokes_spec(12, 2.0, 2);
  bad.dim = 1;
  EXPECT_THROW(PriorBasis{bad}, ConfigError);
  EXPECT_THROW(parse_basis("fourier"), ConfigError);
}

TEST(PriorBasis, DefaultSieveDimension) {
  // alpha = 2, d = 1: lambda_j^{-2} >= 1e-8 lambda_1^{-2} <=> |k| <= 100,
  // so the resolution cap (|k| <= M/3) binds at M = 64.
  EXPECT_EQ(PriorBasis(scalar_spec(1, 64, 2.0, 0)).size(), 2u * 21u);
  // alpha = 8: |k|^16 <= 1e8 <=> |k| <= 3.16, three pairs.
  EXPECT_EQ(PriorBasis(scalar_spec(1, 64, 8.0, 0)).size(), 6u);
}

TEST(SamplePrior, SingleModeVariance) {
  const PriorSpec spec = scalar_spec(1, 16, 2.0, 1);
  const PriorBasis b(spec);
  const double lambda1 = 4 * kPi * kPi;
  const int n = 10000;
  double s2 = 0.0;
  for (int seed = 0; seed < n; ++seed) {
    const double c = b.project(sample_prior(b, seed))[0];
    s2 += c * c;
  }
  EXPECT_NEAR(s2 / n / std::pow(lambda1, -2.0), 1.0, 0.05);
}

TEST(SamplePrior, CoefficientLawAndIndependence) {
  for (double rescale : {0.0, 3.0}) {
    const PriorBasis b(scalar_spec(2, 16, 2.0, 8, rescale));
    const int n = 10000;
    std::vector<std::vector<double>> z(b.size(), std::vector<double>(n));
    for (int s = 0; s < n; ++s) {
      const auto c = b.project(sample_prior(b, 1000 + s));
      for (std::size_t j = 0; j < b.size(); ++j) z[j][s] = c[j] / b.std_devs()[j];
    }
    const double scale = rescale > 0 ? rescale : 1.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double var = std::pow(b.elements()[j].lambda, -2.0) / scale;
      EXPECT_NEAR(b.std_devs()[j] * b.std_devs()[j], var, 1e-14 * var);
      double v = 0.0;
      for (double x : z[j]) v += x * x;
      v /= n;
      // Standard error of a variance estimate of a unit normal: sqrt(2/n).
      EXPECT_LE(std::abs(v - 1.0), 5.0 * std::sqrt(2.0 / n)) << j;
      for (std::size_t k = j + 1; k < b.size(); ++k) {
        double r = 0.0;
        for (int s = 0; s < n; ++s) r += z[j][s] * z[k][s];
        EXPECT_LE(std::abs(r / n), 4.0 / std::sqrt(double(n))) << j << "," << k;
      }
    }
  }
}

TEST(SamplePrior, RescaleHalvesCoefficients) {
  const auto a = sample_prior(scalar_spec(2, 16, 2.0, 12, 0.0), 77);
  const auto b = sample_prior(scalar_spec(2, 16, 2.0, 12, 4.0), 77);
  for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_EQ(b.data()[i], 0.5 * a.data()[i]);
}

TEST(SamplePrior, StokesDrawsAreSolenoidal) {
  for (int seed = 0; seed < 20; ++seed) {
    const auto u = sample_prior(stokes_spec(32, 3.0, 0), seed);
    EXPECT_LE(spectral::max_divergence(u), 1e-14);
    EXPECT_EQ(u({0, 0}, 0), spectral::Complex(0.0, 0.0));
    EXPECT_EQ(u({0, 0}, 1), spectral::Complex(0.0, 0.0));
    EXPECT_LE(spectral::hermitian_defect(u), 1e-16);
  }
}

TEST(SamplePrior, DrawsDoNotDependOnSieveDimension) {
  const PriorBasis small(scalar_spec(1, 32, 2.0, 4)), large(scalar_spec(1, 32, 2.0, 10));
  const auto a = sample_coefficients(small, 5), b = sample_coefficients(large, 5);
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_EQ(a[j], b[j]);
}

TEST(SamplePrior, SobolevMomentStabilisesWithD) {
  // alpha - beta = 2 > d/2: E||theta||_{H^beta}^2 converges as D grows.
  const double alpha = 3.0, beta = 1.0;
  std::vector<double> means;
  for (int D : {8, 16, 32}) {
    const PriorBasis b(scalar_spec(2, 48, alpha, D));
    double m = 0.0;
    for (int s = 0; s < 2000; ++s)
      m += spectral::sobolev_norm_squared(sample_prior(b, s), beta, spectral::SobolevFlavor::homogeneous);
    means.push_back(m / 2000);
  }
  // Exact expectation: sum_j lambda_j^{beta - alpha}.
  const PriorBasis big(scalar_spec(2, 48, alpha, 32));
  double exact = 0.0;
  for (const auto& e : big.elements()) exact += std::pow(e.lambda, beta - alpha);
  EXPECT_NEAR(means[2], exact, 0.05 * exact);
  EXPECT_LE(std::abs(means[2] - means[1]), std::abs(means[1] - means[0]) + 0.05 * exact);
  EXPECT_TRUE(std::isfinite(means[2]));
}

TEST(RkhsNorm, UnitElementZeroAndOracle) {
  const PriorSpec spec = scalar_spec(2, 16, 2.5, 12);
  const PriorBasis b(spec);
  for (std::size_t j = 0; j < b.size(); ++j) {
    std::vector<double> c(b.size(), 0.0);
    c[j] = std::pow(b.elements()[j].lambda, -spec.alpha / 2);
    EXPECT_NEAR(rkhs_norm(b.synthesize(c), b), 1.0, 1e-12);
  }
  EXPECT_EQ(rkhs_norm(b.zero_field(), b), 0.0);
  const auto theta = sample_prior(b, 9);
  // Direct weighted sum over Fourier coefficients: each cos/sin pair at k
  // contributes lambda^alpha * 2|u_hat(k)|^2.
  double oracle = 0.0;
  for (const auto& e : b.elements())
    if (e.parity == Parity::cos) oracle += std::pow(e.lambda, spec.alpha) * 2.0 * std::norm(theta(e.k));
  EXPECT_NEAR(rkhs_norm_squared(theta, b), oracle, 1e-12 * oracle);
  PriorSpec r = spec;
  r.rescale = 7.0;
  EXPECT_NEAR(rkhs_norm_squared(theta, PriorBasis(r)), 7.0 * oracle, 1e-12 * 7.0 * oracle);
}

TEST(RkhsNorm, OutsideSieveIsInfinite) {
  const PriorBasis b(scalar_spec(1, 16, 2.0, 2));
  SpectralField u(1, 16);
  u({3, 0}) = 1.0;
  u({-3, 0}) = 1.0;
  EXPECT_TRUE(std::isinf(rkhs_norm(u, b)));
  SpectralField mean(1, 16);
  mean({0, 0}) = 1.0;
  EXPECT_TRUE(std::isinf(rkhs_norm(mean, b)));
}

TEST(RkhsNorm, StokesRejectsDivergentField) {
  const PriorBasis b(stokes_spec(16, 3.0, 10));
  SpectralField grad(2, 16, 2);
  grad({1, 0}, 0) = 1.0;
  grad({-1, 0}, 0) = 1.0;
  EXPECT_THROW(rkhs_norm(grad, b), PreconditionError);
  EXPECT_TRUE(std::isfinite(rkhs_norm(sample_prior(b, 3), b)));
}

TEST(ContractionRate, FormulaExamples) {
  EXPECT_NEAR(contraction_rate(2.0, 0.0, 1, 1e6), std::pow(10.0, -2.4), 1e-15);
  EXPECT_NEAR(contraction_rate(2.0, 0.0, 1, 1e6), 3.981e-3, 1e-6);
  for (double a : {0.7, 2.0, 5.0})
    for (int d : {1, 2}) EXPECT_EQ(contraction_rate(a, 0.0, d, 1.0), 1.0);
  double prev = 0.0;
  for (double n : {1e2, 1e3, 1e4}) {
    const double r = contraction_rate(2.0, 0.0, 1, n);
    EXPECT_NEAR(n * r * r, std::pow(n, 0.2), 1e-12 * n);
    EXPECT_GT(n * r * r, prev);
    prev = n * r * r;
  }
  EXPECT_NEAR(auto_rescale(2.0, 0.0, 1, 1e5), std::pow(1e5, 0.2), 1e-10);
  EXPECT_THROW(contraction_rate(-1.0, 0.0, 1, 10.0), ConfigError);
  EXPECT_THROW(contraction_rate(1.0, -1.0, 1, 10.0), ConfigError);
}

TEST(TailProbe, Extremes) {
  const PriorBasis b(scalar_spec(1, 16, 2.0, 4));
  const auto zero = prior_tail_probe(b, 1.0, 0.0, 200, 1);
  EXPECT_EQ(zero.exceedance, 1.0);
  EXPECT_EQ(zero.std_error, 0.0);
  const auto huge = prior_tail_probe(b, 1.0, 1e6, 1000, 1);
  EXPECT_EQ(huge.exceedance, 0.0);
  EXPECT_THROW(prior_tail_probe(b, 1.0, 1.0, 99, 1), ConfigError);
  EXPECT_NEAR(prior_tail_probe(b, 1.0, 0.5, 100, 1, 2.0).reference, std::exp(-0.5), 1e-15);
}

TEST(TailProbe, RescaleIsStochasticallySmaller) {
  const PriorSpec a = scalar_spec(1, 16, 2.0, 6, 1.0), b = scalar_spec(1, 16, 2.0, 6, 2.0);
  const PriorBasis ba(a), bb(b);
  // Radius near the median of the unrescaled H^1 norm.
  for (double radius : {0.05, 0.1, 0.2}) {
    const auto pa = prior_tail_probe(ba, 1.0, radius, 10000, 4);
    const auto pb = prior_tail_probe(bb, 1.0, radius, 10000, 4);
    EXPECT_LE(pb.exceedance, pa.exceedance) << radius;
  }
}
