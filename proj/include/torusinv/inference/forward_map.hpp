#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "torusinv/forward.hpp"
#include "torusinv/priors.hpp"

namespace torusinv::inference {

using spectral::SpectralField;
using Prediction = std::array<double, 2>;

/// theta -> G(theta)(Z_i) at design points.
class ForwardMap {
 public:
  virtual ~ForwardMap() = default;
  virtual std::string name() const = 0;
  virtual int value_dim() const = 0;
  virtual std::vector<Prediction> predict(const SpectralField& theta,
                                          std::span<const DesignPoint> points) const = 0;
};

/// A forward map backed by a time-dependent PDE solve.
class PdeForward : public ForwardMap {
 public:
  virtual forward::Trajectory solve(const SpectralField& theta) const = 0;
  virtual double horizon() const = 0;

  std::vector<Prediction> predict(const SpectralField& theta,
                                  std::span<const DesignPoint> points) const override {
    return forward::evaluate_forward(solve(theta), points);
  }
};

class RdeForward final : public PdeForward {
 public:
  RdeForward(forward::ReactionTerm f, double horizon, double dt)
      : f_(f), horizon_(horizon), dt_(dt) {}
  std::string name() const override { return "rde"; }
  int value_dim() const override { return 1; }
  double horizon() const override { return horizon_; }
  const forward::ReactionTerm& reaction() const noexcept { return f_; }
  forward::Trajectory solve(const SpectralField& theta) const override {
    return forward::solve_rde(theta, f_, horizon_, dt_);
  }

 private:
  forward::ReactionTerm f_;
  double horizon_, dt_;
};

class NseForward final : public PdeForward {
 public:
  NseForward(forward::NseParams p, double dt) : p_(std::move(p)), dt_(dt) {}
  std::string name() const override { return "nse"; }
  int value_dim() const override { return 2; }
  double horizon() const override { return p_.horizon; }
  const forward::NseParams& params() const noexcept { return p_; }
  double dt() const noexcept { return dt_; }
  forward::Trajectory solve(const SpectralField& theta) const override {
    return forward::solve_nse(theta, p_, dt_);
  }

 private:
  forward::NseParams p_;
  double dt_;
};

/// Final Oseen iterate u^L from the zero initializer.
class OseenForward final : public PdeForward {
 public:
  OseenForward(forward::NseParams p, double dt, forward::OseenOptions opt)
      : p_(std::move(p)), dt_(dt), opt_(opt) {
    opt_.keep_all = false;
  }
  std::string name() const override { return "oseen"; }
  int value_dim() const override { return 2; }
  double horizon() const override { return p_.horizon; }
  forward::Trajectory solve(const SpectralField& theta) const override {
    auto r = forward::oseen_solve(theta, p_, dt_, opt_);
    return std::move(r.iterates.back());
  }

 private:
  forward::NseParams p_;
  double dt_;
  forward::OseenOptions opt_;
};

/// Linear test map: G(theta)(Z_i) = <theta, e_{sensor(i)}> for a prior basis.
class LinearReadout final : public ForwardMap {
 public:
  explicit LinearReadout(priors::PriorBasis basis) : basis_(std::move(basis)) {}
  std::string name() const override { return "linear_readout"; }
  int value_dim() const override { return 1; }
  std::vector<Prediction> predict(const SpectralField& theta,
                                  std::span<const DesignPoint> points) const override {
    const auto c = basis_.project(theta);
    std::vector<Prediction> out;
    out.reserve(points.size());
    for (const auto& p : points) {
      if (p.sensor < 0 || static_cast<std::size_t>(p.sensor) >= c.size())
        throw PreconditionError("linear readout index out of range");
      out.push_back({c[static_cast<std::size_t>(p.sensor)], 0.0});
    }
    return out;
  }

 private:
  priors::PriorBasis basis_;
};

}  // namespace torusinv::inference
