// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace commute {

/// p_delta(y) = 1 + delta/y + ln y.
double p_delta(double delta, double y);
/// Largest root y >= Gamma_delta of p_delta(y) = z; z >= gamma_delta.
double p_delta_inv(double delta, double z);
/// max(delta, 1).
double Gamma_delta(double delta);
/// p_delta(Gamma_delta): 1 + delta for delta < 1, 2 + ln delta otherwise.
double gamma_delta(double delta);

struct PsiPoint {
  double delta = 0.0;
  double z = 0.0;
  double psi = 0.0;
  double psi_prime = 0.0;
  double y = 0.0;  // p_delta^{-1}(z)
  double g = 0.0;  // 1/z + delta y^2 / (y^2 - delta^2)
};

/// Psi_delta(z) = e^{-z} / (E1(z - ln y) - E1(z)), y = p_delta^{-1}(z), with
/// Psi' = -(Psi + Psi^2 g). Requires z > gamma_delta.
PsiPoint psi(double delta, double z);

/// Second derivative of Psi_delta at a computed point.
double psi_second(const PsiPoint& p);

/// d Psi_delta(z) / d delta at fixed z.
double psi_ddelta(const PsiPoint& p);

struct ConjugateResult {
  double r = 0.0;
  double value = 0.0;     // inf_z (z r + Psi(z))
  double argmin_R = 0.0;  // the minimizing z
  double psi_at_R = 0.0;
};

/// Minimizes z r + Psi_delta(z) over z > gamma_delta; r > 0.
ConjugateResult psi_star(double delta, double r);

}  // namespace commute
