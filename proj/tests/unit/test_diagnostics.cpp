#include <gtest/gtest.h>

#include <cmath>

#include "torusinv/diagnostics.hpp"

using namespace torusinv;
using namespace torusinv::diagnostics;
using inference::NseForward;
using inference::OseenForward;
using inference::RdeForward;
using priors::PriorBasis;
using spectral::SpectralField;

namespace {

PriorBasis stokes_prior(int m, int d, double alpha = 3.0) {
  priors::PriorSpec s;
  s.dim = 2;
  s.resolution = m;
  s.sieve_dim = d;
  s.alpha = alpha;
  s.basis = priors::BasisKind::stokes_divfree;
  return PriorBasis(s);
}

PriorBasis scalar_prior(int m, int d, double alpha = 3.0) {
  priors::PriorSpec s;
  s.dim = 1;
  s.resolution = m;
  s.sieve_dim = d;
  s.alpha = alpha;
  return PriorBasis(s);
}

forward::NseParams nse_params(double nu, double T) {
  forward::NseParams p;
  p.viscosity = nu;
  p.horizon = T;
  return p;
}

}  // namespace

// Noise condition

TEST(NoiseCondition, ExactProxiesSatisfyEverything) {
  const std::vector<double> s2{0.5, 1.0, 2.0, 1.5};
  const auto rs = check_noise_condition(s2, s2, 1000, 0.1);
  ASSERT_EQ(rs.size(), 4u);
  EXPECT_EQ(find_report(rs, "NM2.2")->measured, 0.0);
  for (const auto& r : rs) EXPECT_TRUE(r.satisfied) << r.name;
  EXPECT_TRUE(nm2_satisfied(rs));
}

TEST(NoiseCondition, DoubledProxiesOverestimate) {
  const std::vector<double> sigma2{0.5, 1.0, 2.0};
  std::vector<double> s2;
  for (double v : sigma2) s2.push_back(2.0 * v);
  const double n = 1000, dn = 0.2;
  const auto rs = check_noise_condition(sigma2, s2, n, dn);
  const auto* nm22 = find_report(rs, "NM2.2");
  EXPECT_DOUBLE_EQ(nm22->measured, 0.5);
  EXPECT_DOUBLE_EQ(nm22->threshold, dn * dn / std::log(n));
  EXPECT_EQ(nm22->satisfied, 0.5 <= dn * dn / std::log(n));
  EXPECT_FALSE(nm22->satisfied);
  EXPECT_TRUE(find_report(rs, "NM2.1")->satisfied);
  EXPECT_TRUE(nm2_satisfied(rs));
}

TEST(NoiseCondition, UnderestimateFailsBothBranches) {
  const std::vector<double> sigma2{1.0, 1.0};
  const std::vector<double> s2{0.5, 1.0};
  const auto rs = check_noise_condition(sigma2, s2, 100, 0.3);
  EXPECT_FALSE(find_report(rs, "NM2.1")->satisfied);
  EXPECT_FALSE(find_report(rs, "NM2.2")->satisfied);
  EXPECT_FALSE(nm2_satisfied(rs));
}

TEST(NoiseCondition, FloorControlsNm1) {
  const std::vector<double> sigma2{1.0, 1.0};
  const std::vector<double> s2{0.5, 1.0};
  EXPECT_TRUE(find_report(check_noise_condition(sigma2, s2, 100, 0.3), "NM1")->satisfied);
  EXPECT_FALSE(find_report(check_noise_condition(sigma2, s2, 100, 0.3, 1.0), "NM1")->satisfied);
  EXPECT_THROW(check_noise_condition(sigma2, {1.0, 0.0}, 100, 0.3), PreconditionError);
  EXPECT_THROW(check_noise_condition(sigma2, {1.0}, 100, 0.3), PreconditionError);
}

TEST(NoiseCondition, PanelProxiesAreConsistent) {
  const int lt = 10000;
  const auto basis = scalar_prior(32, 6);
  const auto traj = forward::solve_rde(priors::sample_prior(basis, 3), forward::ReactionTerm::zero(), 0.5, 0.01);
  const auto sensors = observation::equispaced_sensors(1, 4);
  const std::vector<double> sigma2{0.5, 1.0, 1.5, 2.0};
  int ok = 0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    // A zero-length window removes the signal drift, isolating the noise.
    auto panel = observation::generate_panel(traj, sensors, 1e-9, lt, sigma2,
                                             observation::NoiseKind::gaussian, 100 + r);
    const auto proxy = observation::variance_proxy(panel);
    const auto rs = check_noise_condition(sigma2, proxy.s2, 1000, 0.1);
    ok += find_report(rs, "NM2.2")->measured <= 5.0 / std::sqrt(double(lt)) / 0.5;
  }
  EXPECT_GE(ok, 19);
}

// Model condition

TEST(ModelCondition, IdenticalProxyMeasuresZero) {
  const auto basis = stokes_prior(16, 6);
  NseForward a(nse_params(0.1, 0.2), 0.01), b(nse_params(0.1, 0.2), 0.01);
  const auto r = check_model_condition(a, b, basis, 1.0, 3, 1, 1000, 0.1, 1.0,
                                       spectral::SobolevFlavor::homogeneous);
  EXPECT_EQ(r.measured, 0.0);
  EXPECT_TRUE(r.satisfied);
  EXPECT_EQ(r.context["evaluated"], 3);
}

TEST(ModelCondition, MonotoneInRadiusWithNestedProbes) {
  const auto basis = stokes_prior(16, 6);
  NseForward a(nse_params(0.1, 0.2), 0.01), b(nse_params(0.1 * 1.01, 0.2), 0.01);
  const auto probes = model_probes(basis, 4, 2, 1.0, spectral::SobolevFlavor::homogeneous);
  const auto rs = check_model_condition(a, b, probes, {0.5, 1.0, 2.0, 4.0}, 1000, 0.1);
  ASSERT_EQ(rs.size(), 4u);
  for (std::size_t k = 1; k < rs.size(); ++k) EXPECT_LE(rs[k - 1].measured, rs[k].measured);
  EXPECT_GT(rs.back().measured, 0.0);
}

TEST(ModelCondition, OseenToleranceSweepIsRoughlyLinear) {
  // The Oseen fixed point differs from the NSE scheme by O(dt^2); dt is small
  // enough that this floor sits well below the tolerance-driven error.
  const auto basis = stokes_prior(16, 6);
  const auto p = nse_params(0.05, 0.5);
  const double dt = 0.001;
  NseForward exact(p, dt);
  const auto probes = model_probes(basis, 3, 4, 1.0, spectral::SobolevFlavor::homogeneous);
  auto measured = [&](double tol) {
    forward::OseenOptions o;
    o.tolerance = tol;
    OseenForward proxy(p, dt, o);
    return check_model_condition(exact, proxy, probes, {5.0}, 1000, 0.1).front().measured;
  };
  const double ratio = measured(1e-2) / measured(1e-3);
  EXPECT_GE(ratio, 10.0 / 3.0);
  EXPECT_LE(ratio, 30.0);
}

TEST(ModelCondition, ViscosityPerturbationMatchesStabilityGap) {
  const int m = 16;
  SpectralField theta(2, m, 2);
  for (int s : {1, -1}) {
    theta({s * 1, s * 2}, 0) += 0.5 * 2.0 / std::sqrt(5.0);
    theta({s * 1, s * 2}, 1) += -0.5 * 1.0 / std::sqrt(5.0);
  }
  const auto p = nse_params(0.05, 0.5);
  auto q = p;
  q.viscosity *= 1.0 + 1e-3;
  NseForward a(p, 0.01), b(q, 0.01);
  ModelProbeSet probes;
  probes.directions = {theta};
  const double measured = check_model_condition(a, b, probes, {1.0}, 1000, 0.1).front().measured;
  const double gap = forward::stability_gap_nse(theta, p, q, 0.01);
  // Single-mode flow: the gap field is a multiple of theta, so sup-norm and
  // H-dot^2 norm differ by theta's own norm ratio.
  double sup = 0.0;
  for (double v : spectral::to_physical(theta).values) sup = std::max(sup, std::abs(v));
  const double converted = gap * sup / spectral::hdot2_norm(theta);
  EXPECT_GT(measured, 0.5 * converted);
  EXPECT_LT(measured, 2.0 * converted);
}

// Information inequality

namespace {
struct GapFixture {
  PriorBasis basis = scalar_prior(32, 6);
  RdeForward exact{forward::ReactionTerm::bump(1.0, 10.0), 0.2, 0.01};
  GapSetup setup;
  SpectralField theta0;

  GapFixture() {
    setup.exact = &exact;
    setup.proxy = &exact;
    setup.design.horizon = 0.2;
    setup.sigma2.assign(500, 0.01);
    setup.s2 = setup.sigma2;
    setup.mc_draws = 20000;
    setup.seed = 7;
    theta0 = priors::sample_prior(basis, 1) * 20.0;
  }
};
}  // namespace

TEST(InformationGap, ZeroAtTruth) {
  GapFixture f;
  const auto g = information_gap(f.theta0, f.theta0, f.setup);
  EXPECT_EQ(g.lhs, 0.0);
  EXPECT_EQ(g.bound, 0.0);
  EXPECT_TRUE(g.holds);
}

TEST(InformationGap, WellSpecifiedMatchesGaussianKl) {
  GapFixture f;
  for (int r = 0; r < 3; ++r) {
    const auto theta = f.theta0 + priors::sample_prior(f.basis, 50 + r) * 5.0;
    const auto g = information_gap(theta, f.theta0, f.setup);
    const double se = std::hypot(g.lhs_se, g.well_specified_se);
    EXPECT_NEAR(g.lhs, g.well_specified_value, 3.0 * se) << r;
    EXPECT_TRUE(g.holds);
    EXPECT_GT(g.lhs, -3.0 * g.lhs_se);
  }
}

TEST(InformationGap, MisspecifiedReactionStaysBelowBound) {
  GapFixture f;
  RdeForward proxy(forward::ReactionTerm::bump(1.02, 10.0), 0.2, 0.01);
  f.setup.proxy = &proxy;
  f.setup.s2.assign(f.setup.sigma2.size(), 0.012);
  f.setup.model_sup = sup_grid_distance(f.exact.solve(f.theta0), proxy.solve(f.theta0));
  EXPECT_GT(f.setup.model_sup, 0.0);
  for (int r = 0; r < 5; ++r) {
    const auto theta = f.theta0 + priors::sample_prior(f.basis, 80 + r) * 5.0;
    const auto g = information_gap(theta, f.theta0, f.setup);
    EXPECT_TRUE(g.holds) << r << ": " << g.lhs << " vs " << g.bound;
  }
}

TEST(InformationGap, BallMembershipReported) {
  GapFixture f;
  f.setup.delta_n = 1e-6;
  const auto theta = f.theta0 + priors::sample_prior(f.basis, 5) * 5.0;
  EXPECT_FALSE(information_gap(theta, f.theta0, f.setup).in_ball);
  f.setup.delta_n = 1e6;
  EXPECT_TRUE(information_gap(theta, f.theta0, f.setup).in_ball);
}

// Rate fit

TEST(RateFit, ExactPowerLaw) {
  const std::vector<double> ns{250, 1000, 4000, 16000};
  std::vector<double> e;
  for (double n : ns) e.push_back(3.0 * std::pow(n, -0.4));
  const auto f = fit_rate(ns, e);
  EXPECT_NEAR(f.slope, -0.4, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(RateFit, ConstantErrors) {
  const auto f = fit_rate({100, 200, 400}, {0.3, 0.3, 0.3});
  EXPECT_EQ(f.slope, 0.0);
}

TEST(RateFit, NoisyPowerLaw) {
  std::vector<double> ns, e;
  RandomStream rng(derive_key(3, "rate"));
  for (int k = 0; k < 8; ++k) {
    const double n = 100.0 * std::pow(2.0, k);
    ns.push_back(n);
    e.push_back(std::pow(n, -0.35) * (1.0 + 0.05 * (2.0 * rng.uniform() - 1.0)));
  }
  EXPECT_NEAR(fit_rate(ns, e).slope, -0.35, 0.05);
}

TEST(RateFit, RejectsBadInput) {
  EXPECT_THROW(fit_rate({1, 2}, {1, 1}), PreconditionError);
  EXPECT_THROW(fit_rate({1, 2, 3}, {1, 0, 1}), PreconditionError);
  EXPECT_THROW(fit_rate({1, 3, 2}, {1, 1, 1}), PreconditionError);
}

TEST(RateFit, MediansPerN) {
  std::map<double, std::vector<double>> by_n{{100, {0.5, 0.1, 0.3}}, {400, {0.2, 0.05, 0.1}}, {1600, {0.04, 0.06, 0.05}}};
  const auto f = fit_rate_medians(by_n);
  EXPECT_EQ(f.errors, (std::vector<double>{0.3, 0.1, 0.05}));
  EXPECT_LT(f.slope, 0.0);
}

TEST(Stats, KolmogorovSmirnov) {
  EXPECT_EQ(ks_two_sample({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(ks_two_sample({1, 2}, {3, 4}), 1.0);
  EXPECT_NEAR(ks_critical(0.05, 100, 100), 1.358 * std::sqrt(0.02), 1e-3);
}

TEST(Reports, DirectionAndJson) {
  const auto r = make_report("X", 1.0, "<=", 1.0);
  EXPECT_TRUE(r.satisfied);
  EXPECT_FALSE(make_report("X", 1.0, "<", 1.0).satisfied);
  EXPECT_THROW(make_report("X", 1.0, "?", 1.0), ConfigError);
  EXPECT_EQ(to_json(r)["name"], "X");
}
