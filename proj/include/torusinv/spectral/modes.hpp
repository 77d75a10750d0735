#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "torusinv/core/errors.hpp"

namespace torusinv::spectral {

/// Constant in front of |k|^2 in the Laplacian eigenweight. The analytic
/// eigenvalue of -Laplace for exp(2 pi i k.x) is 4 pi^2 |k|^2; `four_pi`
/// reproduces the literal 4 pi |k|^2 convention. The choice only rescales
/// norms and priors; PDE solvers always use the analytic value.
enum class Eigenweight { four_pi_squared, four_pi };

inline double eigenweight(long k_squared, Eigenweight w = Eigenweight::four_pi_squared) {
  const double c = (w == Eigenweight::four_pi_squared) ? 4.0 * std::numbers::pi * std::numbers::pi
                                                       : 4.0 * std::numbers::pi;
  return c * static_cast<double>(k_squared);
}

/// Analytic -Laplace eigenvalue, independent of the norm convention.
inline double laplace_eigenvalue(long k_squared) {
  return eigenweight(k_squared, Eigenweight::four_pi_squared);
}

inline Eigenweight parse_eigenweight(const std::string& s) {
  if (s == "4pi2") return Eigenweight::four_pi_squared;
  if (s == "4pi") return Eigenweight::four_pi;
  throw ConfigError("eigenweight must be \"4pi2\" or \"4pi\", got \"" + s + "\"");
}

inline std::string to_string(Eigenweight w) {
  return w == Eigenweight::four_pi_squared ? "4pi2" : "4pi";
}

using Wavevector = std::array<int, 2>;  // second entry is 0 when d = 1

struct ModeIndex {
  std::size_t j = 0;
  Wavevector k{0, 0};
  double lambda = 0.0;

  long norm2() const { return long(k[0]) * k[0] + long(k[1]) * k[1]; }
};

inline void check_resolution(int dim, int resolution) {
  if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2, got " + std::to_string(dim));
  if (resolution < 4 || resolution % 2 != 0)
    throw ConfigError("resolution must be even and >= 4, got " + std::to_string(resolution));
}

/// All lattice points with |k_i| <= M/2, ordered by (|k|, lexicographic k).
/// Index 0 is the zero mode.
inline std::vector<ModeIndex> enumerate_modes(int dim, int resolution,
                                              Eigenweight w = Eigenweight::four_pi_squared) {
  check_resolution(dim, resolution);
  const int h = resolution / 2;
  std::vector<Wavevector> ks;
  for (int a = -h; a <= h; ++a) {
    if (dim == 1) {
      ks.push_back({a, 0});
    } else {
      for (int b = -h; b <= h; ++b) ks.push_back({a, b});
    }
  }
  std::stable_sort(ks.begin(), ks.end(), [](const Wavevector& x, const Wavevector& y) {
    const long nx = long(x[0]) * x[0] + long(x[1]) * x[1];
    const long ny = long(y[0]) * y[0] + long(y[1]) * y[1];
    return std::tie(nx, x[0], x[1]) < std::tie(ny, y[0], y[1]);
  });
  std::vector<ModeIndex> out;
  out.reserve(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    ModeIndex m;
    m.j = j;
    m.k = ks[j];
    m.lambda = eigenweight(m.norm2(), w);
    out.push_back(m);
  }
  return out;
}

/// Process-wide cache of enumerations; entries are immutable once built.
inline const std::vector<ModeIndex>& mode_table(int dim, int resolution,
                                                Eigenweight w = Eigenweight::four_pi_squared) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<const std::vector<ModeIndex>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{dim, resolution, static_cast<int>(w)}];
  if (!slot) slot = std::make_unique<const std::vector<ModeIndex>>(enumerate_modes(dim, resolution, w));
  return *slot;
}

}  // namespace torusinv::spectral
