// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commute/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "commute/errors.hpp"

namespace commute {

namespace {

constexpr double kEps = 1e-16;

// E1 by its power series, for 0 < x < 1.
double e1_series(double x) {
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -x / k;
    const double add = term / k;
    sum += add;
    if (std::abs(add) < kEps * std::abs(sum)) break;
  }
  return -std::numbers::egamma - std::log(x) - sum;
}

// e^x E1(x) by the modified Lentz continued fraction, for x >= 1.
double e1_scaled_fraction(double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("exponential integral continued fraction did not converge");
}

const GaussRule& rule20() {
  static const GaussRule r = gauss_legendre(20);
  return r;
}

}  // namespace

double phi_exp_integral(double x) {
  if (!(x > 0)) throw DomainError("exponential integral needs x > 0");
  if (x < 1.0) return e1_series(x);
  return std::exp(-x) * e1_scaled_fraction(x);
}

double phi_exp_integral_scaled(double x) {
  if (!(x > 0)) throw DomainError("exponential integral needs x > 0");
  if (x < 1.0) return std::exp(x) * e1_series(x);
  return e1_scaled_fraction(x);
}

double phi_difference_scaled(double w, double z) {
  if (!(w > 0) || z < w) throw DomainError("phi difference needs 0 < w <= z");
  if (z == w) return 0.0;
  const double len = z - w;
  if (len <= std::min(2.0, w)) {
    // int_w^z e^{z-u}/u du by Gauss-Legendre; analytic on a neighbourhood.
    const auto& r = rule20();
    const double half = 0.5 * len;
    const double mid = w + half;
    double sum = 0.0;
    for (std::size_t q = 0; q < r.nodes.size(); ++q) {
      const double u = mid + half * r.nodes[q];
      sum += r.weights[q] * std::exp(z - u) / u;
    }
    return half * sum;
  }
  return std::exp(len) * phi_exp_integral_scaled(w) - phi_exp_integral_scaled(z);
}

double phi_exp_integral_inv(double v) {
  if (!(v > 0) || !std::isfinite(v)) throw DomainError("inverse exponential integral needs v > 0");
  // E1 is decreasing: bracket x with E1(lo) >= v >= E1(hi).
  double lo = 1.0;
  double hi = 1.0;
  while (phi_exp_integral(lo) < v) lo *= 0.5;
  while (phi_exp_integral(hi) > v) hi *= 2.0;
  if (lo == hi) {
    if (phi_exp_integral(lo) == v) return lo;
    lo = 0.5 * hi;
  }
  const double target = std::log(v);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    // g(x) = ln E1(x) - ln v; g'(x) = -e^{-x} / (x E1(x)) = -1 / (x e^x E1(x)).
    const double es = phi_exp_integral_scaled(x);
    const double g = std::log(es) - x - target;
    if (g > 0) lo = x; else hi = x;
    double next = x + g * x * es;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4 * std::numeric_limits<double>::epsilon() * x) return next;
    x = next;
  }
  return x;
}

GaussRule gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss rule needs n >= 1");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace commute
