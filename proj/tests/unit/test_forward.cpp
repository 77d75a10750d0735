#include <gtest/gtest.h>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>

#include "test_helpers.hpp"
#include "torusinv/forward.hpp"

using namespace torusinv;
using namespace torusinv::forward;
using spectral::Complex;
using spectral::SpectralField;
using torusinv::testing::random_field;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralField cosine_1d(int m, int k, double amp = 1.0) {
  SpectralField u(1, m);
  u({k, 0}) = 0.5 * amp;
  u({-k, 0}) = 0.5 * amp;
  return u;
}

/// amp * (k2, -k1)/|k| * cos(2 pi k.x): a Stokes eigenfunction.
SpectralField stokes_mode(int m, spectral::Wavevector k, double amp = 1.0) {
  SpectralField u(2, m, 2);
  const double n = std::hypot(k[0], k[1]);
  for (int s : {1, -1}) {
    const spectral::Wavevector ks{s * k[0], s * k[1]};
    u(ks, 0) += 0.5 * amp * k[1] / n;
    u(ks, 1) += -0.5 * amp * k[0] / n;
  }
  return u;
}

SpectralField taylor_green(int m, double amp = 1.0) {
  spectral::PhysicalField f(2, m, 2);
  for (std::size_t i = 0; i < f.points(); ++i) {
    const auto x = f.point(i);
    f.component(0)[i] = amp * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]);
    f.component(1)[i] = -amp * std::cos(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]);
  }
  return spectral::to_spectral(f);
}

/// Smooth divergence-free field with modes |k_i| <= band, scaled to an L^2 norm.
SpectralField smooth_solenoidal(int m, int band, double norm, std::uint64_t seed) {
  auto u = spectral::leray_project(random_field(2, m, 2, seed, true));
  for (std::size_t o = 0; o < u.lattice_size(); ++o) {
    const auto k = u.wavevector(o);
    if (std::abs(k[0]) > band || std::abs(k[1]) > band) {
      u(k, 0) = 0.0;
      u(k, 1) = 0.0;
    }
  }
  return norm / spectral::l2_norm(u) * u;
}

SpectralField smooth_scalar(int d, int m, int band, double norm, std::uint64_t seed,
                            double s = 0.0) {
  auto u = random_field(d, m, 1, seed, true);
  for (std::size_t o = 0; o < u.lattice_size(); ++o) {
    const auto k = u.wavevector(o);
    if (std::abs(k[0]) > band || std::abs(k[1]) > band) u(k) = 0.0;
  }
  return norm / spectral::sobolev_norm(u, s, spectral::SobolevFlavor::inhomogeneous) * u;
}

double max_grid_error(const SpectralField& u, const std::function<double(double)>& exact) {
  const auto f = spectral::to_physical(u);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.points(); ++i)
    worst = std::max(worst, std::abs(f.values[i] - exact(f.point(i)[0])));
  return worst;
}

double final_l2_distance(const Trajectory& a, const Trajectory& b) {
  return spectral::l2_norm(a.states.back() - b.states.back());
}

}  // namespace

TEST(Reaction, BumpShape) {
  const auto f = ReactionTerm::bump();
  EXPECT_EQ(f(0.0), 0.0);
  EXPECT_EQ(f(10.0), 0.0);
  EXPECT_EQ(f(-12.0), 0.0);
  EXPECT_NEAR(f(5.0), 5.0 * std::exp(1.0 / (0.25 - 1.0)), 1e-15);
  EXPECT_NEAR(f(-5.0), -f(5.0), 1e-15);
  for (double u : {-7.3, -1.0, 0.2, 3.0, 9.9}) {
    const double h = 1e-6;
    EXPECT_NEAR(f.derivative(u), (f(u + h) - f(u - h)) / (2 * h), 1e-7) << u;
  }
  EXPECT_GT(sup_norm(f), 0.0);
  EXPECT_TRUE(std::isfinite(sup_norm(f)));
  EXPECT_EQ(sup_norm(ReactionTerm::zero()), 0.0);
  EXPECT_NEAR(c1_distance(f, ReactionTerm::bump(2.0)), c1_distance(f, ReactionTerm::zero()), 1e-12);
}

TEST(SolveRde, HeatKernelOracle) {
  const auto traj = solve_rde(cosine_1d(64, 1), ReactionTerm::zero(), 0.1, 1e-3);
  EXPECT_EQ(traj.times.front(), 0.0);
  EXPECT_EQ(traj.times.back(), 0.1);
  const double decay = std::exp(-4 * kPi * kPi * 0.1);
  EXPECT_LE(max_grid_error(traj.states.back(), [&](double x) { return decay * std::cos(2 * kPi * x); }),
            1e-8);
  const auto v = evaluate_forward(traj, 0.05, {0.25, 0.0});
  EXPECT_NEAR(v[0], 0.0, 1e-8);
  const auto w = evaluate_forward(traj, 0.05, {0.1, 0.0});
  EXPECT_NEAR(w[0], std::exp(-4 * kPi * kPi * 0.05) * std::cos(2 * kPi * 0.1), 1e-8);
}

TEST(SolveRde, ConstantDataMatchesOdeOracle) {
  const auto f = ReactionTerm::bump();
  for (double c0 : {0.5, 2.0, -4.0}) {
    SpectralField theta(1, 16);
    theta({0, 0}) = c0;
    const auto traj = solve_rde(theta, f, 1.0, 1e-3);

    gsl_odeiv2_system sys{[](double, const double y[], double dydt[], void* p) -> int {
                            dydt[0] = (*static_cast<const ReactionTerm*>(p))(y[0]);
                            return GSL_SUCCESS;
                          },
                          nullptr, 1, const_cast<ReactionTerm*>(&f)};
    auto* drv = gsl_odeiv2_driver_alloc_y_new(&sys, gsl_odeiv2_step_rk8pd, 1e-6, 1e-13, 1e-13);
    double t = 0.0, y[1] = {c0};
    ASSERT_EQ(gsl_odeiv2_driver_apply(drv, &t, 1.0, y), GSL_SUCCESS);
    gsl_odeiv2_driver_free(drv);

    const auto& u = traj.states.back();
    EXPECT_NEAR(u({0, 0}).real(), y[0], 1e-6) << c0;
    for (std::size_t o = 0; o < u.lattice_size(); ++o)
      if (u.wavevector(o) != spectral::Wavevector{0, 0}) {
        EXPECT_LE(std::abs(u.data()[o]), 1e-14);
      }
  }
}

TEST(SolveRde, SecondOrderInTime) {
  // Stiff modes (lambda_k dt >> 1) delay the asymptotic regime, so the 2D
  // case needs a smaller step than the 1D case.
  for (int d : {1, 2}) {
    const auto theta = smooth_scalar(d, 32, 4, 2.0, 40 + d);
    const auto f = ReactionTerm::bump(3.0, 10.0);
    const double T = 0.2, dt = d == 1 ? 0.00125 : 0.000625;
    const auto ref = solve_rde(theta, f, T, dt / 32);
    const double e1 = final_l2_distance(solve_rde(theta, f, T, dt), ref);
    const double e2 = final_l2_distance(solve_rde(theta, f, T, dt / 2), ref);
    const double order = std::log2(e1 / e2);
    EXPECT_GE(order, 1.8) << "d=" << d;
    EXPECT_LE(order, 2.2) << "d=" << d;
  }
}

TEST(SolveRde, Errors) {
  SpectralField theta(1, 16);
  EXPECT_THROW(solve_rde(theta, ReactionTerm::zero(), 0.1, 0.2), PreconditionError);
  EXPECT_THROW(solve_rde(theta, ReactionTerm::zero(), 0.0, 0.01), ConfigError);
  EXPECT_THROW(solve_rde(SpectralField(1, 16, 2), ReactionTerm::zero(), 0.1, 0.01), PreconditionError);
  SpectralField complex_valued(1, 16);
  complex_valued({1, 0}) = Complex{1.0, 0.0};
  EXPECT_THROW(solve_rde(complex_valued, ReactionTerm::zero(), 0.1, 0.01), PreconditionError);
  SpectralField nan(1, 16);
  nan({0, 0}) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_rde(nan, ReactionTerm::zero(), 0.1, 0.01), NumericError);
}

TEST(SolveRde, BlowUpReportsTime) {
  // Overflowing reaction amplitude makes the explicit stage non-finite.
  SpectralField theta(1, 16);
  theta({0, 0}) = 5.0;
  try {
    solve_rde(theta, ReactionTerm::bump(1e308, 10.0), 1.0, 0.1);
    FAIL() << "expected divergence";
  } catch (const SolverDivergence& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LE(e.time(), 1.0);
  }
}

TEST(SolveRde, StatesStayReal) {
  const auto theta = smooth_scalar(2, 24, 5, 5.0, 77);
  const auto traj = solve_rde(theta, ReactionTerm::bump(), 0.1, 0.005);
  for (const auto& s : traj.states) EXPECT_LE(spectral::hermitian_defect(s), 1e-13);
}

TEST(SolveRde, AprioriBoundHasNoGrowthTrend) {
  std::vector<double> ratios;
  for (double n : {1.0, 2.0, 4.0, 8.0}) {
    const auto theta = smooth_scalar(1, 32, 3, n, 9, 2.0);
    const auto traj = solve_rde(theta, ReactionTerm::bump(), 0.5, 0.005);
    double sup = 0.0;
    for (const auto& s : traj.states)
      sup = std::max(sup, spectral::sobolev_norm_squared(s, 2.0, spectral::SobolevFlavor::inhomogeneous));
    ratios.push_back(sup / (1.0 + n * n));
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  EXPECT_LE(hi / lo, 4.0);
  EXPECT_LE(ratios.back(), 2.0 * ratios.front());
}

TEST(SolveRde, ReactionTermLipschitz) {
  const auto theta = smooth_scalar(1, 32, 3, 4.0, 21);
  const auto base = ReactionTerm::bump(1.0);
  const auto u0 = solve_rde(theta, base, 0.5, 0.005);
  std::vector<double> ratios;
  for (double eps : {1e-2, 5e-3}) {
    const auto f = ReactionTerm::bump(1.0 + eps);
    const auto u = solve_rde(theta, f, 0.5, 0.005);
    double sup = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      sup = std::max(sup, spectral::sobolev_norm(u.states[i] - u0.states[i], 2.0,
                                                 spectral::SobolevFlavor::inhomogeneous));
    ratios.push_back(sup / c1_distance(base, f));
  }
  EXPECT_GT(ratios[0], 0.0);
  EXPECT_LE(ratios[0] / ratios[1], 2.0);
  EXPECT_GE(ratios[0] / ratios[1], 0.5);
}

TEST(SolveNse, TaylorGreenDecay) {
  const double nu = 0.01;
  const auto theta = taylor_green(64);
  const auto traj = solve_nse(theta, {nu, {}, 0.5}, 0.01);
  const auto exact = std::exp(-8 * kPi * kPi * nu * 0.5) * theta;
  EXPECT_LE(spectral::l2_norm(traj.states.back() - exact) / spectral::l2_norm(exact), 1e-6);
}

TEST(SolveNse, ZeroStaysZero) {
  const SpectralField zero(2, 16, 2);
  const auto traj = solve_nse(zero, {0.1, {}, 0.2}, 0.01);
  for (const auto& s : traj.states) EXPECT_EQ(s, zero);
}

TEST(SolveNse, EnergyDoesNotIncrease) {
  const auto theta = smooth_solenoidal(32, 4, 1.0, 5);
  const auto traj = solve_nse(theta, {0.02, {}, 0.5}, 0.005);
  double prev = spectral::l2_norm(traj.states.front());
  for (const auto& s : traj.states) {
    const double e = spectral::l2_norm(s);
    EXPECT_LE(e, prev * (1.0 + 1e-12));
    prev = e;
  }
}

TEST(SolveNse, InvariantsHoldOnEverySnapshot) {
  const auto theta = smooth_solenoidal(32, 5, 2.0, 8);
  NseParams p{0.05, stokes_mode(32, {1, 1}, 0.5), 0.3};
  const auto traj = solve_nse(theta, p, 0.005);
  for (const auto& s : traj.states) {
    EXPECT_LE(spectral::max_divergence(s), 1e-12);
    EXPECT_LE(std::abs(s({0, 0}, 0)) + std::abs(s({0, 0}, 1)), 1e-15);
    EXPECT_LE(spectral::hermitian_defect(s), 1e-13);
  }
}

TEST(SolveNse, SecondOrderInTime) {
  // Amplitude and step keep dt M max|u| below the CFL limit, so no substeps.
  const auto theta = smooth_solenoidal(32, 4, 0.5, 12);
  const NseParams p{0.02, stokes_mode(32, {1, 2}, 0.5), 0.4};
  const auto ref = solve_nse(theta, p, 0.005 / 32);
  const double e1 = final_l2_distance(solve_nse(theta, p, 0.005), ref);
  const double e2 = final_l2_distance(solve_nse(theta, p, 0.0025), ref);
  const double order = std::log2(e1 / e2);
  EXPECT_GE(order, 1.8);
  EXPECT_LE(order, 2.2);
}

TEST(SolveNse, SpectralConvergenceInSpace) {
  // Taylor-Green alone is resolved exactly at any M, so add a second mode.
  const auto make = [](int m) { return taylor_green(m) + stokes_mode(m, {1, 2}, 0.6); };
  const NseParams p32{0.01, {}, 0.25}, p64{0.01, {}, 0.25}, p128{0.01, {}, 0.25};
  const double dt = 0.002;
  const auto ref = solve_nse(make(128), p128, dt).states.back();
  const auto err = [&](int m, const NseParams& p) {
    const auto u = solve_nse(make(m), p, dt).states.back();
    return spectral::l2_norm(spectral::resample(u, 128) - ref);
  };
  const double e32 = err(32, p32), e64 = err(64, p64);
  EXPECT_GE(e32 / e64, 10.0) << e32 << " " << e64;
}

TEST(SolveNse, Preconditions) {
  SpectralField grad(2, 16, 2);
  grad({1, 0}, 0) = 1.0;
  grad({-1, 0}, 0) = 1.0;
  EXPECT_THROW(solve_nse(grad, {0.1, {}, 0.1}, 0.01), PreconditionError);
  SpectralField mean(2, 16, 2);
  mean({0, 0}, 0) = 1.0;
  EXPECT_THROW(solve_nse(mean, {0.1, {}, 0.1}, 0.01), PreconditionError);
  EXPECT_THROW(solve_nse(SpectralField(2, 16, 2), {0.0, {}, 0.1}, 0.01), ConfigError);
  EXPECT_THROW(solve_nse(SpectralField(1, 16, 2), {0.1, {}, 0.1}, 0.01), PreconditionError);
}

TEST(SolveNse, AdaptiveSubstepsKeepLargeStepsStable) {
  const auto theta = smooth_solenoidal(32, 4, 20.0, 3);
  const auto traj = solve_nse(theta, {0.05, {}, 0.1}, 0.05);
  EXPECT_TRUE(traj.states.back().all_finite());
  const auto fine = solve_nse(theta, {0.05, {}, 0.1}, 0.05 / 16);
  EXPECT_LE(final_l2_distance(traj, fine), 0.05 * spectral::l2_norm(fine.states.back()));
}

TEST(Oseen, NseSolutionIsAFixedPoint) {
  const auto theta = smooth_solenoidal(32, 4, 1.0, 31);
  const NseParams p{0.05, stokes_mode(32, {2, 1}, 0.5), 0.3};
  const double dt = 0.005;
  const auto u = solve_nse(theta, p, dt);
  const double tol = nse_time_error(theta, p, dt);
  OseenOptions opt;
  opt.iterations = 1;
  const auto r = oseen_solve(theta, p, dt, opt, u);
  ASSERT_EQ(r.successive_gaps.size(), 1u);
  EXPECT_LE(r.successive_gaps[0], 10.0 * tol) << "tol=" << tol;
}

TEST(Oseen, FirstIterateIsStokesFlow) {
  const double nu = 0.1;
  const spectral::Wavevector k{1, 2};
  const auto theta = stokes_mode(16, k, 1.0);
  OseenOptions opt;
  opt.iterations = 1;
  const auto r = oseen_solve(theta, {nu, {}, 0.5}, 0.01, opt);
  ASSERT_EQ(r.iterates.size(), 2u);
  const double lambda = 4 * kPi * kPi * 5.0;
  const auto& u1 = r.iterates[1];
  for (std::size_t i = 0; i < u1.size(); ++i) {
    const auto exact = std::exp(-nu * lambda * u1.times[i]) * theta;
    EXPECT_LE(spectral::l2_norm(u1.states[i] - exact), 1e-8);
  }
}

TEST(Oseen, GapsDecayGeometrically) {
  const auto theta = smooth_solenoidal(24, 3, 1.0, 17);
  OseenOptions opt;
  opt.iterations = 6;
  const auto r = oseen_solve(theta, {0.5, {}, 0.5}, 0.01, opt);
  ASSERT_EQ(r.successive_gaps.size(), 6u);
  EXPECT_EQ(r.iterates.size(), 7u);
  double worst = 0.0;
  for (std::size_t l = 0; l + 1 < r.successive_gaps.size(); ++l) {
    if (r.successive_gaps[l + 1] < 1e-11) break;
    worst = std::max(worst, r.successive_gaps[l + 1] / r.successive_gaps[l]);
  }
  EXPECT_LT(worst, 0.5);
  EXPECT_GT(worst, 0.0);
}

TEST(Oseen, ToleranceModeAndCap) {
  const auto theta = smooth_solenoidal(24, 3, 1.0, 17);
  OseenOptions opt;
  opt.tolerance = 1e-8;
  const auto r = oseen_solve(theta, {0.5, {}, 0.5}, 0.01, opt);
  EXPECT_LE(r.successive_gaps.back(), 1e-8);
  EXPECT_EQ(static_cast<int>(r.successive_gaps.size()), r.iterations);
  opt.max_iterations = 2;
  opt.tolerance = 1e-14;
  try {
    oseen_solve(theta, {0.5, {}, 0.5}, 0.01, opt);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.history().size(), 2u);
  }
  OseenOptions both;
  both.iterations = 2;
  both.tolerance = 1e-3;
  EXPECT_THROW(oseen_solve(theta, {0.5, {}, 0.5}, 0.01, both), ConfigError);
}

TEST(Oseen, KeepLastOnly) {
  const auto theta = smooth_solenoidal(16, 3, 1.0, 2);
  OseenOptions opt;
  opt.iterations = 4;
  opt.keep_all = false;
  const auto r = oseen_solve(theta, {0.5, {}, 0.2}, 0.01, opt);
  EXPECT_EQ(r.iterates.size(), 2u);
  EXPECT_EQ(r.successive_gaps.size(), 4u);
}

TEST(EvaluateForward, GridTimesAndLatticePoints) {
  const auto theta = smooth_solenoidal(16, 4, 1.0, 4);
  const auto traj = solve_nse(theta, {0.1, {}, 0.1}, 0.01);
  for (std::size_t i : {std::size_t{0}, std::size_t{3}, traj.size() - 1}) {
    const auto phys = spectral::to_physical(traj.states[i]);
    for (std::size_t p = 0; p < phys.points(); p += 11) {
      const auto v = evaluate_forward(traj, traj.times[i], phys.point(p));
      EXPECT_NEAR(v[0], phys.component(0)[p], 1e-12);
      EXPECT_NEAR(v[1], phys.component(1)[p], 1e-12);
    }
  }
}

TEST(EvaluateForward, ConstantInTime) {
  Trajectory traj;
  const auto u = random_field(1, 16, 1, 3);
  for (int n = 0; n <= 10; ++n) traj.push(0.1 * n, u);
  const double v0 = evaluate_forward(traj, 0.0, {0.37, 0.0})[0];
  for (double t : {0.05, 0.333, 0.71, 1.0}) EXPECT_NEAR(evaluate_forward(traj, t, {0.37, 0.0})[0], v0, 1e-13);
  EXPECT_THROW(evaluate_forward(traj, 1.01, {0.0, 0.0}), PreconditionError);
  EXPECT_THROW(evaluate_forward(traj, -0.01, {0.0, 0.0}), PreconditionError);
}

TEST(EvaluateForward, FourthOrderTimeInterpolation) {
  const auto shape = cosine_1d(8, 1);
  const auto err = [&](int n) {
    Trajectory traj;
    for (int i = 0; i <= n; ++i) traj.push(double(i) / n, std::sin(3.0 * i / n) * shape);
    double worst = 0.0;
    for (int j = 0; j < 997; ++j) {
      const double t = (j + 0.5) / 997.0;
      worst = std::max(worst, std::abs(evaluate_forward(traj, t, {0.0, 0.0})[0] - std::sin(3.0 * t)));
    }
    return worst;
  };
  const double ratio = err(20) / err(40);
  EXPECT_GE(std::log2(ratio), 3.6);
}

TEST(EvaluateForward, BatchedMatchesPointwise) {
  const auto theta = smooth_scalar(2, 16, 5, 3.0, 6);
  const auto traj = solve_rde(theta, ReactionTerm::bump(), 0.2, 0.01);
  std::vector<DesignPoint> pts;
  RandomStream rng(derive_key(1, "pts"));
  for (int i = 0; i < 200; ++i) {
    const std::array<double, 2> sensor{0.125 * (i % 4), 0.3};
    pts.push_back({rng.uniform(0.0, 0.2), i % 2 ? sensor : std::array<double, 2>{rng.uniform(), rng.uniform()}, i % 4});
  }
  const auto batch = evaluate_forward(traj, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    EXPECT_NEAR(batch[i][0], evaluate_forward(traj, pts[i].t, pts[i].x)[0], 1e-12);
}

TEST(StabilityGap, IdenticalParametersGiveZero) {
  const auto theta = smooth_solenoidal(16, 3, 1.0, 10);
  const NseParams p{0.1, stokes_mode(16, {1, 1}, 1.0), 0.2};
  EXPECT_LE(stability_gap_nse(theta, p, p, 0.01), 1e-13);
}

TEST(StabilityGap, LinearResponseInViscosity) {
  const auto theta = smooth_solenoidal(24, 4, 1.0, 10);
  const NseParams p{0.05, {}, 0.3};
  const auto gap = [&](double eps) {
    NseParams q = p;
    q.viscosity *= 1.0 + eps;
    return stability_gap_nse(theta, p, q, 0.01);
  };
  const double ratio = gap(1e-2) / gap(5e-3);
  EXPECT_GE(ratio, 1.5);
  EXPECT_LE(ratio, 2.5);
}

TEST(StabilityGap, LinearResponseInForcing) {
  const auto theta = smooth_solenoidal(24, 4, 1.0, 10);
  const auto g = stokes_mode(24, {2, 1}, 1.0);
  const NseParams p{0.05, stokes_mode(24, {1, 1}, 1.0), 0.3};
  std::vector<double> per_unit;
  for (double delta : {1e-2, 5e-3}) {
    NseParams q = p;
    q.forcing.axpy(delta, g);
    per_unit.push_back(stability_gap_nse(theta, p, q, 0.01) /
                       spectral::sobolev_norm(delta * g, 1.0, spectral::SobolevFlavor::homogeneous));
  }
  EXPECT_LE(per_unit[0] / per_unit[1], 2.0);
  EXPECT_GE(per_unit[0] / per_unit[1], 0.5);
}

TEST(TrajectoryIo, RoundTripAndThinning) {
  const auto theta = smooth_solenoidal(16, 3, 1.0, 1);
  const auto traj = solve_nse(theta, {0.1, {}, 0.105}, 0.01);
  ASSERT_EQ(traj.size(), 12u);
  const auto path = (std::filesystem::temp_directory_path() / "torusinv_traj.bin").string();
  write_trajectory(path, traj);
  const auto back = read_trajectory(path);
  EXPECT_EQ(back.times, traj.times);
  for (std::size_t i = 0; i < traj.size(); ++i) EXPECT_EQ(back.states[i], traj.states[i]);
  EXPECT_EQ(back.solver, "solve_nse");
  write_trajectory(path, traj, 5);
  const auto thin = read_trajectory(path);
  ASSERT_EQ(thin.size(), 4u);
  EXPECT_EQ(thin.times.back(), traj.times.back());
  EXPECT_EQ(thin.store_every, 5);
  std::filesystem::remove(path);
}

TEST(TrajectoryIo, SolverStoreEvery) {
  const auto traj = solve_rde(cosine_1d(16, 1), ReactionTerm::zero(), 0.1, 0.01, 3);
  const std::vector<double> expect{0.0, 0.03, 0.06, 0.09, 0.1};
  ASSERT_EQ(traj.size(), expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(traj.times[i], expect[i], 1e-15);
}
