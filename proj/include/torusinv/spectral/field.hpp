#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "torusinv/core/errors.hpp"
#include "torusinv/spectral/modes.hpp"

namespace torusinv::spectral {

using Complex = std::complex<double>;

/// Truncated Fourier coefficients of a real scalar (1 component) or vector
/// (2 components) field on the unit torus [0,1)^d:
///
///   u(x) = sum_{|k_i| <= M/2} u_hat(k) exp(2 pi i k.x).
///
/// Coefficients live on the full square lattice {-M/2..M/2}^d, stored densely
/// per component. Real-valuedness is the Hermitian symmetry
/// u_hat(-k) = conj(u_hat(k)), which every operation in this library keeps.
class SpectralField {
 public:
  SpectralField() = default;

  SpectralField(int dim, int resolution, int components = 1)
      : dim_(dim), resolution_(resolution), components_(components) {
    check_resolution(dim, resolution);
    if (components != 1 && components != 2)
      throw ConfigError("components must be 1 or 2, got " + std::to_string(components));
    data_.assign(static_cast<std::size_t>(components) * lattice_size(), Complex{0.0, 0.0});
  }

  int dim() const noexcept { return dim_; }
  int resolution() const noexcept { return resolution_; }
  int components() const noexcept { return components_; }
  int half() const noexcept { return resolution_ / 2; }
  int side() const noexcept { return resolution_ + 1; }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t lattice_size() const noexcept {
    const auto s = static_cast<std::size_t>(side());
    return dim_ == 1 ? s : s * s;
  }

  bool contains(const Wavevector& k) const noexcept {
    const int h = half();
    if (k[0] < -h || k[0] > h) return false;
    if (dim_ == 1) return k[1] == 0;
    return k[1] >= -h && k[1] <= h;
  }

  std::size_t offset(const Wavevector& k) const noexcept {
    const int h = half();
    if (dim_ == 1) return static_cast<std::size_t>(k[0] + h);
    return static_cast<std::size_t>(k[0] + h) * static_cast<std::size_t>(side()) +
           static_cast<std::size_t>(k[1] + h);
  }

  Wavevector wavevector(std::size_t offset) const noexcept {
    const int h = half();
    if (dim_ == 1) return {static_cast<int>(offset) - h, 0};
    const auto s = static_cast<std::size_t>(side());
    return {static_cast<int>(offset / s) - h, static_cast<int>(offset % s) - h};
  }

  Complex& operator()(const Wavevector& k, int c = 0) {
    return data_[static_cast<std::size_t>(c) * lattice_size() + offset(k)];
  }
  const Complex& operator()(const Wavevector& k, int c = 0) const {
    return data_[static_cast<std::size_t>(c) * lattice_size() + offset(k)];
  }

  std::span<Complex> component(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * lattice_size(), lattice_size()};
  }
  std::span<const Complex> component(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * lattice_size(), lattice_size()};
  }

  std::vector<Complex>& data() noexcept { return data_; }
  const std::vector<Complex>& data() const noexcept { return data_; }

  bool same_shape(const SpectralField& o) const noexcept {
    return dim_ == o.dim_ && resolution_ == o.resolution_ && components_ == o.components_;
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  SpectralField& operator*=(double a) {
    for (auto& z : data_) z *= a;
    return *this;
  }
  /// this += a * o
  SpectralField& axpy(double a, const SpectralField& o) {
    require_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * o.data_[i];
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

  friend bool operator==(const SpectralField&, const SpectralField&) = default;

  bool all_finite() const noexcept {
    for (const auto& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  void require_shape(const SpectralField& o) const {
    if (!same_shape(o)) throw PreconditionError("spectral fields have different shapes");
  }

 private:
  int dim_ = 0;
  int resolution_ = 0;
  int components_ = 0;
  std::vector<Complex> data_;
};

/// Real samples on the uniform lattice x = (i_0/M, i_1/M), row-major, one
/// block of M^d values per component.
struct PhysicalField {
  int dim = 1;
  int resolution = 0;
  int components = 1;
  std::vector<double> values;

  PhysicalField() = default;
  PhysicalField(int d, int m, int c) : dim(d), resolution(m), components(c) {
    check_resolution(d, m);
    values.assign(static_cast<std::size_t>(c) * points(), 0.0);
  }

  std::size_t points() const noexcept {
    const auto m = static_cast<std::size_t>(resolution);
    return dim == 1 ? m : m * m;
  }
  double spacing() const noexcept { return 1.0 / resolution; }

  std::span<double> component(int c) {
    return {values.data() + static_cast<std::size_t>(c) * points(), points()};
  }
  std::span<const double> component(int c) const {
    return {values.data() + static_cast<std::size_t>(c) * points(), points()};
  }

  std::array<double, 2> point(std::size_t idx) const noexcept {
    const double h = spacing();
    if (dim == 1) return {h * static_cast<double>(idx), 0.0};
    const auto m = static_cast<std::size_t>(resolution);
    return {h * static_cast<double>(idx / m), h * static_cast<double>(idx % m)};
  }
};

/// Largest |u_hat(-k) - conj(u_hat(k))| over the lattice.
inline double hermitian_defect(const SpectralField& u) {
  double worst = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    for (std::size_t o = 0; o < u.lattice_size(); ++o) {
      const auto k = u.wavevector(o);
      const Wavevector mk{-k[0], -k[1]};
      worst = std::max(worst, std::abs(u(mk, c) - std::conj(u(k, c))));
    }
  }
  return worst;
}

/// Largest |k . u_hat(k)| for a 2-component field.
inline double max_divergence(const SpectralField& u) {
  if (u.components() != 2) throw PreconditionError("divergence needs a 2-component field");
  double worst = 0.0;
  for (std::size_t o = 0; o < u.lattice_size(); ++o) {
    const auto k = u.wavevector(o);
    const Complex div = double(k[0]) * u(k, 0) + double(k[1]) * u(k, 1);
    worst = std::max(worst, std::abs(div));
  }
  return worst;
}

/// Integer-wavenumber lattice points of the field (in storage order).
template <class Fn>
void for_each_wavevector(const SpectralField& u, Fn&& fn) {
  for (std::size_t o = 0; o < u.lattice_size(); ++o) fn(u.wavevector(o), o);
}

}  // namespace torusinv::spectral
