// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commute/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "commute/errors.hpp"
#include "commute/special.hpp"

namespace commute {

namespace {

constexpr double kMachEps = std::numeric_limits<double>::epsilon();

std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double p_delta(double delta, double y) {
  if (!(delta >= 0.0)) throw DomainError("p_delta needs delta >= 0");
  if (!(y > 0.0)) throw DomainError("p_delta needs y > 0");
  return 1.0 + delta / y + std::log(y);
}

double Gamma_delta(double delta) {
  if (!(delta >= 0.0)) throw DomainError("Gamma_delta needs delta >= 0");
  return std::max(delta, 1.0);
}

double gamma_delta(double delta) {
  if (!(delta >= 0.0)) throw DomainError("gamma_delta needs delta >= 0");
  return delta < 1.0 ? 1.0 + delta : 2.0 + std::log(delta);
}

double p_delta_inv(double delta, double z) {
  const double g = gamma_delta(delta);
  if (z < g) {
    if (z < g - 8 * kMachEps * g) {
      throw DomainError("p_delta_inv needs z >= gamma_delta (" + number(g) + "), got " +
                        number(z));
    }
    return Gamma_delta(delta);
  }
  // In u = ln y the equation q(u) = 1 + delta e^{-u} + u - z = 0 is convex and
  // increasing on [ln Gamma, inf); Newton from the right end converges monotonically.
  double lo = std::log(Gamma_delta(delta));
  double hi = z - 1.0;
  double u = hi;
  for (int it = 0; it < 300; ++it) {
    const double e = delta * std::exp(-u);
    const double q = 1.0 + e + u - z;
    if (q == 0.0) break;
    if (q > 0.0) hi = u; else lo = u;
    const double dq = 1.0 - e;
    double next = dq > 0.0 ? u - q / dq : 0.5 * (lo + hi);
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 2 * kMachEps * std::max(1.0, std::abs(u))) {
      u = next;
      break;
    }
    u = next;
  }
  return std::max(std::exp(u), Gamma_delta(delta));
}

PsiPoint psi(double delta, double z) {
  const double g0 = gamma_delta(delta);
  if (!(z > g0)) {
    throw DomainError("psi needs z > gamma_delta (" + number(g0) + "), got " + number(z));
  }
  PsiPoint p;
  p.delta = delta;
  p.z = z;
  p.y = p_delta_inv(delta, z);
  const double w = 1.0 + delta / p.y;
  if (std::abs(z - std::log(p.y) - w) > 1e-9 * z) {
    throw NumericalError("p_delta inverse lost accuracy at z = " + number(z));
  }
  const double d = phi_difference_scaled(w, z);
  if (!(d > 0.0)) throw NumericalError("psi denominator vanished at z = " + number(z));
  p.psi = 1.0 / d;
  const double y2 = p.y * p.y;
  p.g = 1.0 / z + delta * y2 / (y2 - delta * delta);
  p.psi_prime = -(p.psi + p.psi * p.psi * p.g);
  return p;
}

double psi_second(const PsiPoint& p) {
  const double y = p.y;
  const double d = p.delta;
  const double y2d2 = y * y - d * d;
  const double g_prime = -1.0 / (p.z * p.z) - 2.0 * d * d * d * y * y * y / (y2d2 * y2d2 * (y - d));
  return -p.psi_prime * (1.0 + 2.0 * p.psi * p.g) - p.psi * p.psi * g_prime;
}

double psi_ddelta(const PsiPoint& p) {
  const double y2 = p.y * p.y;
  return p.psi * p.psi * y2 / (y2 - p.delta * p.delta);
}

ConjugateResult psi_star(double delta, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("psi_star needs r > 0, got " + number(r));
  const double g0 = gamma_delta(delta);
  auto slope = [&](double z) { return psi(delta, z).psi_prime + r; };

  // Bracket the root of Psi'(z) = -r; Psi' increases from -inf to 0.
  double zlo = g0 + 1.0;
  double zhi = zlo;
  if (slope(zlo) < 0.0) {
    double d = 1.0;
    do {
      zlo = zhi;
      d *= 2.0;
      zhi = g0 + d;
      if (d > 1e6) throw NumericalError("psi_star: no upper bracket for r = " + number(r));
    } while (slope(zhi) < 0.0);
  } else {
    double d = 1.0;
    const double floor = 1e-15 * std::max(1.0, g0);
    do {
      zhi = zlo;
      d *= 0.125;
      if (d < floor) {
        throw NumericalError("psi_star: minimizer at the gamma_delta boundary for r = " +
                             number(r));
      }
      zlo = g0 + d;
    } while (slope(zlo) > 0.0);
  }

  double z = 0.5 * (zlo + zhi);
  for (int it = 0; it < 200; ++it) {
    const PsiPoint p = psi(delta, z);
    const double f = p.psi_prime + r;
    if (f == 0.0) break;
    if (f < 0.0) zlo = z; else zhi = z;
    double next = z - f / psi_second(p);
    if (!(next > zlo && next < zhi)) next = 0.5 * (zlo + zhi);
    const bool done = std::abs(next - z) <= 4 * kMachEps * z || zhi - zlo <= 4 * kMachEps * z;
    z = next;
    if (done) break;
  }
  const PsiPoint p = psi(delta, z);
  return ConjugateResult{r, z * r + p.psi, z, p.psi};
}

}  // namespace commute
