#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "torusinv/spectral/field.hpp"

namespace torusinv::spectral {

enum class SobolevFlavor { inhomogeneous, homogeneous };

inline void require_finite(const SpectralField& u, const char* where) {
  if (!u.all_finite()) throw NumericError(std::string(where) + ": non-finite coefficients");
}

/// Squared spectral Sobolev norm; vector fields add component norms.
///   h^s : sum (1 + lambda_k)^s |u_hat(k)|^2
///   H^s : sum_{k != 0} lambda_k^s |u_hat(k)|^2
inline double sobolev_norm_squared(const SpectralField& u, double s, SobolevFlavor flavor,
                                   Eigenweight w = Eigenweight::four_pi_squared) {
  require_finite(u, "sobolev_norm");
  double total = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    for (std::size_t o = 0; o < u.lattice_size(); ++o) {
      const auto k = u.wavevector(o);
      const long n2 = long(k[0]) * k[0] + long(k[1]) * k[1];
      const double a2 = std::norm(u(k, c));
      if (flavor == SobolevFlavor::inhomogeneous) {
        total += std::pow(1.0 + eigenweight(n2, w), s) * a2;
      } else if (n2 == 0) {
        if (s < 0.0 && a2 != 0.0)
          throw PreconditionError("homogeneous norm with s < 0 needs a vanishing zero mode");
      } else {
        total += std::pow(eigenweight(n2, w), s) * a2;
      }
    }
  }
  return total;
}

inline double sobolev_norm(const SpectralField& u, double s, SobolevFlavor flavor,
                           Eigenweight w = Eigenweight::four_pi_squared) {
  return std::sqrt(sobolev_norm_squared(u, s, flavor, w));
}

inline double l2_norm(const SpectralField& u) {
  return sobolev_norm(u, 0.0, SobolevFlavor::inhomogeneous);
}

/// Real L^2 inner product (fields are real, so the sum is real).
inline double l2_inner(const SpectralField& u, const SpectralField& v) {
  u.require_shape(v);
  double total = 0.0;
  for (std::size_t i = 0; i < u.data().size(); ++i)
    total += (u.data()[i] * std::conj(v.data()[i])).real();
  return total;
}

/// Homogeneous H^2 norm, the distance used for trajectories and Oseen gaps.
inline double hdot2_norm(const SpectralField& u) {
  return sobolev_norm(u, 2.0, SobolevFlavor::homogeneous);
}

/// Leray projection onto divergence-free, zero-mean fields:
/// u_hat(k) -> (I - k k^T / |k|^2) u_hat(k), zero mode removed.
/// Written through the stream function psi = (k_2 u_1 - k_1 u_2)/|k|^2.
inline SpectralField leray_project(const SpectralField& u) {
  if (u.dim() != 2 || u.components() != 2)
    throw PreconditionError("leray_project needs a 2-component field on T^2");
  SpectralField out(u.dim(), u.resolution(), 2);
  for (std::size_t o = 0; o < u.lattice_size(); ++o) {
    const auto k = u.wavevector(o);
    const double n2 = double(k[0]) * k[0] + double(k[1]) * k[1];
    if (n2 == 0.0) continue;
    const Complex psi = (double(k[1]) * u(k, 0) - double(k[0]) * u(k, 1)) / n2;
    out(k, 0) = double(k[1]) * psi;
    out(k, 1) = -double(k[0]) * psi;
  }
  return out;
}

/// Largest retained wavenumber under the 2/3 rule.
inline int dealias_cutoff(int resolution) noexcept { return resolution / 3; }

inline bool inside_dealias(const Wavevector& k, int resolution) noexcept {
  const int c = dealias_cutoff(resolution);
  return std::abs(k[0]) <= c && std::abs(k[1]) <= c;
}

/// Zero every coefficient with some |k_i| > M/3.
inline void dealias_inplace(SpectralField& u) {
  for (int c = 0; c < u.components(); ++c) {
    auto comp = u.component(c);
    for (std::size_t o = 0; o < u.lattice_size(); ++o)
      if (!inside_dealias(u.wavevector(o), u.resolution())) comp[o] = Complex{0.0, 0.0};
  }
}

inline SpectralField dealias(SpectralField u) {
  dealias_inplace(u);
  return u;
}

/// Spectral derivative d/dx_axis.
inline SpectralField derivative(const SpectralField& u, int axis) {
  SpectralField out = u;
  for (int c = 0; c < u.components(); ++c) {
    auto comp = out.component(c);
    for (std::size_t o = 0; o < u.lattice_size(); ++o) {
      const auto k = u.wavevector(o);
      comp[o] *= Complex{0.0, 2.0 * std::numbers::pi * k[axis]};
    }
  }
  return out;
}

/// Exponential table exp(2 pi i k x) for k = -h..h.
inline std::vector<Complex> fourier_phases(double x, int h) {
  std::vector<Complex> e(static_cast<std::size_t>(2 * h + 1));
  for (int k = 0; k <= h; ++k) {
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * x * k);
    e[static_cast<std::size_t>(h + k)] = z;
    e[static_cast<std::size_t>(h - k)] = std::conj(z);
  }
  return e;
}

/// Exact evaluation of the truncated series at a point. Only modes with
/// |k_i| <= band are summed (band = M/2 includes everything).
inline std::array<double, 2> evaluate_point(const SpectralField& u, const std::array<double, 2>& x,
                                            int band = -1) {
  const int h = u.half();
  const int b = band < 0 ? h : std::min(band, h);
  const auto e0 = fourier_phases(x[0], b);
  std::array<double, 2> out{0.0, 0.0};
  if (u.dim() == 1) {
    for (int c = 0; c < u.components(); ++c) {
      Complex s{0.0, 0.0};
      for (int k = -b; k <= b; ++k) s += u({k, 0}, c) * e0[std::size_t(k + b)];
      out[c] = s.real();
    }
    return out;
  }
  const auto e1 = fourier_phases(x[1], b);
  for (int c = 0; c < u.components(); ++c) {
    Complex s{0.0, 0.0};
    for (int k0 = -b; k0 <= b; ++k0) {
      Complex row{0.0, 0.0};
      for (int k1 = -b; k1 <= b; ++k1) row += u({k0, k1}, c) * e1[std::size_t(k1 + b)];
      s += row * e0[std::size_t(k0 + b)];
    }
    out[c] = s.real();
  }
  return out;
}

/// Largest |k_i| carrying a nonzero coefficient (0 for constant fields).
inline int spectral_band(const SpectralField& u) {
  int band = 0;
  for (int c = 0; c < u.components(); ++c) {
    auto comp = u.component(c);
    for (std::size_t o = 0; o < u.lattice_size(); ++o) {
      if (comp[o] == Complex{0.0, 0.0}) continue;
      const auto k = u.wavevector(o);
      band = std::max({band, std::abs(k[0]), std::abs(k[1])});
    }
  }
  return band;
}

/// Same field on another lattice: coefficients present on both lattices
/// are copied, the rest are zero (padding or truncation).
inline SpectralField resample(const SpectralField& u, int resolution) {
  SpectralField out(u.dim(), resolution, u.components());
  for (int c = 0; c < u.components(); ++c) {
    for (std::size_t o = 0; o < out.lattice_size(); ++o) {
      const auto k = out.wavevector(o);
      if (u.contains(k)) out(k, c) = u(k, c);
    }
  }
  return out;
}

}  // namespace torusinv::spectral
