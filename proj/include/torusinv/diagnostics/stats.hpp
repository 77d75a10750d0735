#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "torusinv/core/errors.hpp"

namespace torusinv::diagnostics {

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("ks_two_sample needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / na - double(j) / nb));
  }
  return d;
}

/// Asymptotic two-sample critical value c(alpha) sqrt((n + m) / (n m)).
inline double ks_critical(double alpha, std::size_t n, std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("ks_critical needs alpha in (0, 1)");
  const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
  return c * std::sqrt(double(n + m) / (double(n) * double(m)));
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw PreconditionError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw PreconditionError("mean of an empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

}  // namespace torusinv::diagnostics
