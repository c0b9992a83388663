// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "commute/grid.hpp"

namespace commute {

/// A real function on [0,1] given in closed form or by a table.
///
/// Kinds: constant c; affine a + b x; exponential c e^{k x}; tabulated values
/// on uniform nodes over [0,1] with linear interpolation.
class Profile {
 public:
  enum class Kind { constant, affine, exponential, tabulated };

  static Profile constant(double c);
  static Profile affine(double a, double b);
  static Profile exponential(double c, double k);
  static Profile tabulated(std::vector<double> values);

  double operator()(double x) const {
    switch (kind_) {
      case Kind::constant: return p0_;
      case Kind::affine: return p0_ + p1_ * x;
      case Kind::exponential: return p0_ * std::exp(p1_ * x);
      case Kind::tabulated: break;
    }
    return tabulated_at(x);
  }
  Kind kind() const { return kind_; }
  std::string describe() const;

  /// Smallest and largest value over [0,1] (exact for closed forms).
  double min_value() const;
  double max_value() const;

 private:
  double tabulated_at(double x) const;

  Kind kind_ = Kind::constant;
  double p0_ = 0.0;
  double p1_ = 0.0;
  std::optional<GridFunction> table_;
};

/// Diffusion data, constraint geometry and the scale density fixed on
/// C = [0, ell] u [i0, 1]. The s0_prime profile is defined on all of [0,1]; its
/// values on (ell, i0) give the static extension used as a baseline.
struct ProblemSpec {
  Profile sigma = Profile::constant(1.0);
  Profile f = Profile::constant(1.0);
  double ell = 0.0;
  double i0 = 1.0;
  Profile s0_prime = Profile::constant(1.0);
  std::size_t grid_n = 2049;

  /// Throws ConfigError describing the first violated requirement.
  void validate() const;

  double rho_at(double x) const;
  double sigma_at(double x) const { return sigma(x); }
  double f_at(double x) const { return f(x); }

  /// [0,1] split at ell and i0, spacing 1 / (grid_n - 1).
  GridLayout layout() const;
  /// Uniform layout with extra interior breakpoints.
  GridLayout layout_with(std::vector<double> extra) const;
};

}  // namespace commute
