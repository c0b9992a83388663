// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "commute/grid.hpp"
#include "commute/measures.hpp"
#include "commute/problem.hpp"

namespace commute {

/// Scalars that determine the reset-policy payoff for levels ell < i.
struct BoundaryConstants {
  double kappa = 0.0;  // expected cost of the descent from ell, reflected at ell
  double a = 0.0;      // m~_f(i)
  double b = 0.0;      // s~(i)
  double c = 0.0;      // m_f(ell)
  double t_ell = 0.0;  // s~(ell)
  double k = 0.0;      // s(ell)
};

BoundaryConstants boundary_constants(const DiffusionMeasures& m, double ell, double i);
BoundaryConstants boundary_constants(const ScaleFunction& s, const ProblemSpec& spec,
                                     double ell, double i);

/// kappa from the tail form int_0^ell s' m~_f - s(ell) m~_f(ell).
double kappa_tail_form(const DiffusionMeasures& m, double ell);

/// H(z) = 1 + k/t + ln(t / s~(z)) on [ell, i], sampled on a uniform grid.
struct HTransform {
  double k = 0.0;
  double t_ell = 0.0;
  GridFunction values;

  double operator()(double z) const { return values(z); }
};

HTransform h_transform(const ScaleFunction& s, const BoundaryConstants& consts, double ell,
                       double i, std::size_t n = 0);

enum class PayoffMode { fast, verify };

struct PayoffResult {
  double value = 0.0;      // closed form through H
  double expansion = 0.0;  // expectation over the running-infimum law (verify mode)
  double gap = 0.0;        // |value - expansion| (verify mode)
  BoundaryConstants consts;
};

/// Payoff of the reset policy built on `m.scale()`: follow the scale until the
/// first hit of 1, then jump to ell on the first return to the running infimum.
PayoffResult payoff_sstar(const DiffusionMeasures& m, double ell, double i,
                          PayoffMode mode = PayoffMode::fast);
double payoff_sstar(const ScaleFunction& s, const ProblemSpec& spec, double ell, double i);

/// Expectation form of the same payoff, written as phi terms plus an integral
/// against the law of the running infimum.
double payoff_expansion(const DiffusionMeasures& m, double ell, double i);

/// Cost of the static policy from x: phi(x, 1) + phi(1, 0).
double static_cost(const DiffusionMeasures& m, double x);

/// P(I_{T1} <= x) for a start at i under scale s.
double infimum_law_cdf(const ScaleFunction& s, double i, double x);

}  // namespace commute
