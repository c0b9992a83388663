// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "commute/grid.hpp"
#include "commute/problem.hpp"

namespace commute {

/// Positive scale density s' on [0,1] with s(x) = int_0^x s' and
/// s~(x) = int_x^1 s' accumulated independently.
class ScaleFunction {
 public:
  explicit ScaleFunction(PiecewiseFunction s_prime);

  /// Samples `density` on `layout` (log-linear interpolation).
  static ScaleFunction from_density(const GridLayout& layout,
                                    const std::function<double(double, Side)>& density);
  static ScaleFunction from_profile(const GridLayout& layout, const Profile& density);
  /// The problem's s0 density on its own layout.
  static ScaleFunction initial(const ProblemSpec& spec);

  double prime(double x, Side side = Side::right) const { return s_prime_(x, side); }
  double s(double x) const { return integral_(x); }
  double s_tilde(double x) const { return integral_.tail(x); }
  double total() const { return integral_.total(); }
  /// The x in [0,1] with s(x) = y; `hint` seeds the Newton iteration.
  double inverse(double y, double hint) const;

  const PiecewiseFunction& density() const { return s_prime_; }
  const Antiderivative& integral() const { return integral_; }

 private:
  PiecewiseFunction s_prime_;
  Antiderivative integral_;
};

/// m_f, its tail, the two cost primitives and int sqrt(rho), all on the
/// nodes of a scale's layout.
///
/// P1(x) = int_0^x s' m_f and P2(x) = int_0^x s' m~_f, so that
/// phi(x, y) = P1(y) - P1(x) for x <= y and P2(x) - P2(y) for x >= y.
class DiffusionMeasures {
 public:
  DiffusionMeasures(const ScaleFunction& scale, const ProblemSpec& spec);

  const ScaleFunction& scale() const { return scale_; }
  double rho(double x, Side side = Side::right) const { return rho_(x, side); }
  double mf(double x) const { return mf_(x); }
  double mf_tilde(double x) const { return mf_.tail(x); }
  double mf_total() const { return mf_.total(); }
  double p1(double x) const { return p1_(x); }
  double p2(double x) const { return p2_(x); }
  /// int_0^x sqrt(rho).
  double root_rho_integral(double x) const { return root_rho_(x); }

  const PiecewiseFunction& rho_function() const { return rho_; }
  const PiecewiseFunction& mf_density() const { return mf_prime_; }
  const Antiderivative& mf_integral() const { return mf_; }
  const Antiderivative& p1_integral() const { return p1_; }
  const Antiderivative& p2_integral() const { return p2_; }

 private:
  ScaleFunction scale_;
  PiecewiseFunction rho_;
  PiecewiseFunction mf_prime_;
  Antiderivative mf_;
  Antiderivative p1_;
  Antiderivative p2_;
  Antiderivative root_rho_;
};

/// s'(u) = exp(-2 int_0^u mu / sigma^2); throws DomainError for sigma <= 0.
ScaleFunction scale_from_drift(const GridLayout& layout, const Profile& mu,
                               const Profile& sigma);

/// rho = 2 f / sigma^2 sampled on the problem layout, log-linear.
PiecewiseFunction rho(const ProblemSpec& spec);

/// beta(x) = int_ell^x sqrt(rho) on [ell, 1].
GridFunction beta(const ProblemSpec& spec);

/// Node functions m_f and m~_f on the scale's layout.
struct MfPair {
  PiecewiseFunction mf;
  PiecewiseFunction mf_tilde;
};
MfPair mf_measures(const ScaleFunction& s, const ProblemSpec& spec);

/// Expected cost to hit y from x.
double phi_cost(const DiffusionMeasures& m, double x, double y);
double phi_cost(const ScaleFunction& s, const ProblemSpec& spec, double x, double y);

/// |phi(0,1) + phi(1,0) - s(1) m_f(1)|.
double commute_identity_gap(const DiffusionMeasures& m);
double commute_identity_gap(const ScaleFunction& s, const ProblemSpec& spec);

}  // namespace commute
