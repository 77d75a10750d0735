#pragma once

#include <cmath>
#include <map>
#include <vector>

#include <json.hpp>

#include "torusinv/diagnostics/stats.hpp"

namespace torusinv::diagnostics {

struct RateFit {
  std::vector<double> Ns;
  std::vector<double> errors;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(error) on log(N).
inline RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& errors) {
  if (ns.size() != errors.size()) throw PreconditionError("fit_rate: Ns and errors differ in length");
  if (ns.size() < 3) throw PreconditionError("fit_rate needs at least 3 sample sizes");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(errors[i] > 0.0)) throw PreconditionError("fit_rate: errors must be positive");
    if (!(ns[i] > 0.0) || (i > 0 && ns[i] <= ns[i - 1]))
      throw PreconditionError("fit_rate: Ns must be positive and strictly increasing");
  }
  const std::size_t n = ns.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(ns[i]);
    y[i] = std::log(errors[i]);
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  RateFit f{ns, errors, sxy / sxx, 0.0, 1.0};
  f.intercept = my - f.slope * mx;
  if (syy > 0.0) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      sse += r * r;
    }
    f.r2 = 1.0 - sse / syy;
  }
  return f;
}

/// Median error per N over seeds, then fit_rate.
inline RateFit fit_rate_medians(const std::map<double, std::vector<double>>& by_n) {
  std::vector<double> ns, errs;
  for (const auto& [n, e] : by_n) {
    ns.push_back(n);
    errs.push_back(median(e));
  }
  return fit_rate(ns, errs);
}

inline nlohmann::json to_json(const RateFit& f) {
  return {{"Ns", f.Ns}, {"errors", f.errors}, {"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

}  // namespace torusinv::diagnostics
