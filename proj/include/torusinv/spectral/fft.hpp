#pragma once

// Physical <-> spectral transforms backed by FFTW real-to-complex plans.
//
// FFTW's planner is not thread-safe, so plans are created under a global
// mutex and cached per (dim, M). Execution goes through the new-array
// interface, which FFTW documents as safe to call concurrently.

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "torusinv/spectral/field.hpp"

namespace torusinv::spectral {

namespace detail {

struct RealPlans {
  fftw_plan forward = nullptr;   // r2c
  fftw_plan backward = nullptr;  // c2r
  RealPlans() = default;
  RealPlans(const RealPlans&) = delete;
  RealPlans& operator=(const RealPlans&) = delete;
  ~RealPlans() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

inline const RealPlans& real_plans(int dim, int m) {
  static std::map<std::pair<int, int>, std::unique_ptr<RealPlans>> cache;
  std::lock_guard lock(fftw_planner_mutex());
  auto& slot = cache[{dim, m}];
  if (!slot) {
    auto plans = std::make_unique<RealPlans>();
    const std::size_t n_real = dim == 1 ? std::size_t(m) : std::size_t(m) * m;
    const std::size_t n_cplx = dim == 1 ? std::size_t(m / 2 + 1) : std::size_t(m) * (m / 2 + 1);
    std::vector<double> r(n_real);
    std::vector<Complex> c(n_cplx);
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (dim == 1) {
      plans->forward = fftw_plan_dft_r2c_1d(m, r.data(), cp, flags);
      plans->backward = fftw_plan_dft_c2r_1d(m, cp, r.data(), flags);
    } else {
      plans->forward = fftw_plan_dft_r2c_2d(m, m, r.data(), cp, flags);
      plans->backward = fftw_plan_dft_c2r_2d(m, m, cp, r.data(), flags);
    }
    slot = std::move(plans);
  }
  return *slot;
}

inline int wrap(int k, int m) noexcept { return ((k % m) + m) % m; }

}  // namespace detail

/// Number of lattice representatives of an FFT bin: Nyquist axes (|k_i| = M/2)
/// appear twice on the lattice.
inline int nyquist_multiplicity(const SpectralField& u, const Wavevector& k) noexcept {
  const int h = u.half();
  int mult = (k[0] == h || k[0] == -h) ? 2 : 1;
  if (u.dim() == 2 && (k[1] == h || k[1] == -h)) mult *= 2;
  return mult;
}

/// Physical grid values -> coefficients. Nyquist bins are split evenly
/// between their lattice representatives, which keeps Hermitian symmetry.
inline SpectralField to_spectral(const PhysicalField& f) {
  const int d = f.dim, m = f.resolution;
  SpectralField u(d, m, f.components);
  const auto& plans = detail::real_plans(d, m);
  const int hc = m / 2 + 1;
  std::vector<Complex> half(d == 1 ? std::size_t(hc) : std::size_t(m) * hc);
  std::vector<double> in(f.points());
  const double scale = 1.0 / static_cast<double>(f.points());
  for (int c = 0; c < f.components; ++c) {
    auto src = f.component(c);
    std::copy(src.begin(), src.end(), in.begin());
    fftw_execute_dft_r2c(plans.forward, in.data(), reinterpret_cast<fftw_complex*>(half.data()));
    auto bin = [&](int b0, int b1) -> Complex {
      if (d == 1) return b0 < hc ? half[b0] : std::conj(half[m - b0]);
      if (b1 < hc) return half[std::size_t(b0) * hc + b1];
      return std::conj(half[std::size_t(detail::wrap(-b0, m)) * hc + (m - b1)]);
    };
    for (std::size_t o = 0; o < u.lattice_size(); ++o) {
      const auto k = u.wavevector(o);
      const Complex v = bin(detail::wrap(k[0], m), d == 1 ? 0 : detail::wrap(k[1], m));
      u(k, c) = v * (scale / nyquist_multiplicity(u, k));
    }
  }
  return u;
}

/// Coefficients -> physical grid values (aliases folded onto FFT bins).
inline PhysicalField to_physical(const SpectralField& u) {
  const int d = u.dim(), m = u.resolution();
  PhysicalField f(d, m, u.components());
  const auto& plans = detail::real_plans(d, m);
  const int hc = m / 2 + 1;
  std::vector<Complex> half;
  for (int c = 0; c < u.components(); ++c) {
    half.assign(d == 1 ? std::size_t(hc) : std::size_t(m) * hc, Complex{0.0, 0.0});
    for (std::size_t o = 0; o < u.lattice_size(); ++o) {
      const auto k = u.wavevector(o);
      const int b0 = detail::wrap(k[0], m);
      const int b1 = d == 1 ? 0 : detail::wrap(k[1], m);
      if (d == 1) {
        if (b0 < hc) half[b0] += u(k, c);
      } else if (b1 < hc) {
        half[std::size_t(b0) * hc + b1] += u(k, c);
      }
    }
    auto out = f.component(c);
    fftw_execute_dft_c2r(plans.backward, reinterpret_cast<fftw_complex*>(half.data()), out.data());
  }
  return f;
}

}  // namespace torusinv::spectral
