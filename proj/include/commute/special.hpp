// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace commute {

/// Exponential integral E1(x) = int_x^inf e^{-u}/u du, x > 0.
double phi_exp_integral(double x);

/// e^x E1(x); finite for all x > 0 and free of underflow for large x.
double phi_exp_integral_scaled(double x);

/// e^z (E1(w) - E1(z)) for 0 < w <= z, accurate when z - w is small.
double phi_difference_scaled(double w, double z);

/// Inverse of E1 on (0, inf): returns x with E1(x) = v, v > 0.
double phi_exp_integral_inv(double v);

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(std::size_t n);

}  // namespace commute
