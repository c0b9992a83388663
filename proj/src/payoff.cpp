// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commute/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "commute/errors.hpp"

namespace commute {

namespace {

void check_levels(double ell, double i) {
  if (!(ell >= 0.0 && ell < i && i <= 1.0)) {
    throw DomainError("payoff needs 0 <= ell < i <= 1");
  }
}

// Node integrand on the scale's layout. Non-finite values (the tail scale
// vanishes at 1) are replaced by cubic extrapolation from the left.
PiecewiseFunction node_integrand(
    const PiecewiseFunction& like,
    const std::function<double(std::size_t, std::size_t)>& fn) {
  std::vector<GridFunction> pieces;
  for (std::size_t k = 0; k < like.piece_count(); ++k) {
    const auto& p = like.piece(k);
    std::vector<double> v(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) v[j] = fn(k, j);
    const std::size_t n = v.size();
    if (!std::isfinite(v[n - 1])) {
      if (n >= 5) {
        v[n - 1] = 4 * v[n - 2] - 6 * v[n - 3] + 4 * v[n - 4] - v[n - 5];
      } else {
        v[n - 1] = v[n - 2];
      }
    }
    pieces.emplace_back(p.lo(), p.hi(), std::move(v), Interp::linear);
  }
  return PiecewiseFunction(std::move(pieces));
}

}  // namespace

BoundaryConstants boundary_constants(const DiffusionMeasures& m, double ell, double i) {
  check_levels(ell, i);
  const auto& s = m.scale();
  BoundaryConstants bc;
  bc.a = m.mf_tilde(i);
  bc.b = s.s_tilde(i);
  bc.c = m.mf(ell);
  bc.t_ell = s.s_tilde(ell);
  bc.k = s.s(ell);
  bc.kappa = ell > 0.0 ? bc.c * bc.k - m.p1(ell) : 0.0;
  if (ell == 0.0) {
    bc.c = 0.0;
    bc.k = 0.0;
  }
  return bc;
}

BoundaryConstants boundary_constants(const ScaleFunction& s, const ProblemSpec& spec,
                                     double ell, double i) {
  return boundary_constants(DiffusionMeasures(s, spec), ell, i);
}

double kappa_tail_form(const DiffusionMeasures& m, double ell) {
  if (ell == 0.0) return 0.0;
  return m.p2(ell) - m.scale().s(ell) * m.mf_tilde(ell);
}

HTransform h_transform(const ScaleFunction& s, const BoundaryConstants& consts, double ell,
                       double i, std::size_t n) {
  check_levels(ell, i);
  if (n == 0) {
    const double h = s.density().piece(s.density().piece_index(ell)).step();
    n = std::max<std::size_t>(4, static_cast<std::size_t>(std::llround((i - ell) / h)) + 1);
  }
  const double base = 1.0 + consts.k / consts.t_ell;
  auto values = GridFunction::sample(
      ell, i, n,
      [&](double z) {
        const double tail = s.s_tilde(z);
        if (!(tail > 0.0)) throw DomainError("tail scale vanishes inside [ell, i]");
        return base + std::log(consts.t_ell / tail);
      },
      Interp::linear);
  return HTransform{consts.k, consts.t_ell, std::move(values)};
}

PayoffResult payoff_sstar(const DiffusionMeasures& m, double ell, double i, PayoffMode mode) {
  check_levels(ell, i);
  PayoffResult out;
  out.consts = boundary_constants(m, ell, i);
  const auto& bc = out.consts;
  if (i == 1.0) {
    out.value = bc.kappa;
  } else {
    const auto& s = m.scale();
    const double base = 1.0 + bc.k / bc.t_ell;
    const double h_i = base + std::log(bc.t_ell / bc.b);
    // e^{-H(i)} e^{H(z)} = b / s~(z), so the H-integral reduces to b int rho H / s'.
    const auto integrand = node_integrand(s.density(), [&](std::size_t k, std::size_t j) {
      const double tail = s.integral().node_tail_values(k)[j];
      const double sp = s.density().piece(k)[j];
      const double h = base + std::log(bc.t_ell / tail);
      return m.rho_function().piece(k)[j] * h / sp;
    });
    const Antiderivative acc(integrand);
    out.value = bc.kappa + bc.b * bc.c + bc.a * bc.b * h_i + bc.b * acc.between(ell, i);
  }
  if (mode == PayoffMode::verify) {
    out.expansion = payoff_expansion(m, ell, i);
    out.gap = std::abs(out.value - out.expansion);
  }
  return out;
}

double payoff_sstar(const ScaleFunction& s, const ProblemSpec& spec, double ell, double i) {
  return payoff_sstar(DiffusionMeasures(s, spec), ell, i).value;
}

double payoff_expansion(const DiffusionMeasures& m, double ell, double i) {
  check_levels(ell, i);
  const auto& s = m.scale();
  const auto bc = boundary_constants(m, ell, i);
  const double up = phi_cost(m, i, 1.0);
  const double down = phi_cost(m, 1.0, 0.0);
  if (i == 1.0) return bc.kappa;
  const double p2_one = m.p2(1.0);
  // Density of the running infimum on (ell, i] is b s'(x) / s~(x)^2.
  const auto integrand = node_integrand(s.density(), [&](std::size_t k, std::size_t j) {
    const double tail = s.integral().node_tail_values(k)[j];
    const double sp = s.density().piece(k)[j];
    const double phi_1x = p2_one - m.p2_integral().node_values(k)[j];
    return phi_1x * sp / (tail * tail);
  });
  const Antiderivative acc(integrand);
  const double ratio = bc.b / bc.t_ell;
  return up + down * ratio + (1.0 - ratio) * bc.kappa + bc.b * acc.between(ell, i);
}

double static_cost(const DiffusionMeasures& m, double x) {
  return phi_cost(m, x, 1.0) + phi_cost(m, 1.0, 0.0);
}

double infimum_law_cdf(const ScaleFunction& s, double i, double x) {
  if (x < 0.0) return 0.0;
  if (x >= i) return 1.0;
  return s.s_tilde(i) / s.s_tilde(x);
}

}  // namespace commute
