// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "commute/grid.hpp"
#include "commute/kernel.hpp"
#include "commute/measures.hpp"
#include "commute/payoff.hpp"
#include "commute/problem.hpp"

namespace commute {

struct ValueResult {
  double value = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double r = 0.0;
  bool degenerate = false;  // i == ell: no free interval
  ConjugateResult conj;
  BoundaryConstants consts;
};

/// Optimal value for a start at i when the scale is fixed on [0, ell] u [i, 1]
/// (taken from `m.scale()`), through the conjugate kernel.
ValueResult value_V(const DiffusionMeasures& m, double ell, double i);
double value_V(const ProblemSpec& spec, const ScaleFunction& s, double i);

struct TSearchResult {
  double value = 0.0;
  double t_opt = 0.0;
  double y_opt = 0.0;        // t_opt / b
  bool at_boundary = false;  // minimizer within one grid step of t = b
};

/// Same value by direct minimization over the free tail scale t = s~(ell) >= b.
TSearchResult value_by_t_search(const DiffusionMeasures& m, double ell, double i,
                                std::size_t grid = 2000);

struct ELProfile {
  GridFunction H;
  double D = 0.0;
};

/// Stationary H on the grid of `beta` with H(lo) = h_ell and H(hi) = h_i.
ELProfile euler_lagrange_H(const GridFunction& beta, double h_ell, double h_i);

struct OptimalScaleOptions {
  bool richardson = true;
  int max_refinements = 8;
};

struct OptimalScaleResult {
  ScaleFunction scale;  // s0 on C, the feedback density on (ell, i0)
  // Per node of [ell, i0], ascending. Values at ell are one-sided limits
  // obtained by extrapolation; the residual is NaN at the two end nodes.
  std::vector<double> level;
  std::vector<double> s_hat_prime;
  std::vector<double> s_tilde;
  std::vector<double> mf_tilde;
  std::vector<double> value_at;
  std::vector<double> residual;
  std::vector<double> argmin_R;
  double richardson_error = 0.0;  // max |s~_h - s~_{h/2}| over common nodes
  double exp_representation_gap = 0.0;
  double max_abs_residual = 0.0;  // over interior nodes
};

/// Integrates the feedback law for the optimal density downward from i0.
OptimalScaleResult optimal_scale(const ProblemSpec& spec,
                                 const OptimalScaleOptions& options = {});

/// Optimality residual at level i for the scale in `m`; <= 0 for every scale,
/// zero exactly along the optimum.
double delta_residual(const DiffusionMeasures& m, double ell, double i);
double delta_residual(const ScaleFunction& s, const ProblemSpec& spec, double i);

enum class Phase { pre_t1, post_t1 };

/// Dynamic value surfaces for a policy whose scale, fixed on [i, 1], is `m.scale()`.
class ValueSurface {
 public:
  ValueSurface(const DiffusionMeasures& m, double ell, double i0);

  /// Before the first hit of 1 with running infimum i <= x.
  double pre(double i, double x) const;
  /// After the first hit of 1 with I_{T1} = i, before the reset.
  double post(double i, double x) const;
  /// After the reset: descent from x <= ell with reflection at ell.
  double after_reset(double x) const;
  double frontier_value(double i) const;

  double operator()(double i, double x, Phase phase) const {
    return phase == Phase::pre_t1 ? pre(i, x) : post(i, x);
  }

 private:
  DiffusionMeasures m_;
  double ell_;
  double i0_;
  double kappa_;
  double c_;
};

double value_surface(const DiffusionMeasures& m, double ell, double i0, double i, double x,
                     Phase phase);

}  // namespace commute
