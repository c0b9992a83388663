// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commute/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "commute/errors.hpp"
#include "commute/special.hpp"

namespace commute {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double beta_between(const DiffusionMeasures& m, double ell, double i) {
  return m.root_rho_integral(i) - m.root_rho_integral(ell);
}

}  // namespace

ValueResult value_V(const DiffusionMeasures& m, double ell, double i) {
  if (!(ell >= 0.0 && ell <= i && i <= 1.0)) throw DomainError("value_V needs 0 <= ell <= i <= 1");
  ValueResult out;
  const auto& s = m.scale();
  if (i == ell) {
    out.degenerate = true;
    auto& bc = out.consts;
    bc.b = bc.t_ell = s.s_tilde(ell);
    bc.a = m.mf_tilde(ell);
    bc.k = ell > 0.0 ? s.s(ell) : 0.0;
    bc.c = ell > 0.0 ? m.mf(ell) : 0.0;
    bc.kappa = ell > 0.0 ? bc.c * bc.k - m.p1(ell) : 0.0;
    out.delta = bc.b > 0.0 ? bc.k / bc.b : 0.0;
    out.value = bc.kappa + bc.b * bc.c + bc.a * bc.b * (1.0 + out.delta);
    return out;
  }
  out.consts = boundary_constants(m, ell, i);
  const auto& bc = out.consts;
  if (i == 1.0 || !(bc.b > 0.0)) {
    out.value = bc.kappa;
    return out;
  }
  out.beta = beta_between(m, ell, i);
  out.delta = bc.k / bc.b;
  out.r = bc.a * bc.b / (out.beta * out.beta);
  out.conj = psi_star(out.delta, out.r);
  out.value = bc.kappa + bc.b * bc.c + out.beta * out.beta * out.conj.value;
  return out;
}

double value_V(const ProblemSpec& spec, const ScaleFunction& s, double i) {
  return value_V(DiffusionMeasures(s, spec), spec.ell, i).value;
}

TSearchResult value_by_t_search(const DiffusionMeasures& m, double ell, double i,
                                std::size_t grid) {
  const auto bc = boundary_constants(m, ell, i);
  const double beta = beta_between(m, ell, i);
  const double ab = bc.a * bc.b;
  const double delta = bc.k / bc.b;
  const double b2 = beta * beta;
  // Objective in u = ln(t / b) >= 0.
  auto objective = [&](double u) {
    const double y = std::exp(u);
    const double w = 1.0 + delta / y;
    const double p = w + u;
    return ab * p + b2 / phi_difference_scaled(w, p);
  };
  constexpr double u_max = 60.0;
  grid = std::max<std::size_t>(grid, 16);
  std::size_t best = 1;
  double best_val = std::numeric_limits<double>::infinity();
  auto node = [&](std::size_t j) {
    const double q = static_cast<double>(j) / static_cast<double>(grid);
    return u_max * q * q;
  };
  for (std::size_t j = 1; j <= grid; ++j) {
    const double v = objective(node(j));
    if (v < best_val) {
      best_val = v;
      best = j;
    }
  }
  double lo = node(best - 1);
  double hi = node(std::min(best + 1, grid));
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1 > 0.0 ? x1 : 1e-300);
  double f2 = objective(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1 > 0.0 ? x1 : 1e-300);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  const double u = f1 < f2 ? x1 : x2;
  TSearchResult out;
  out.value = bc.kappa + bc.b * bc.c + std::min({f1, f2, best_val});
  out.y_opt = std::exp(u);
  out.t_opt = out.y_opt * bc.b;
  out.at_boundary = best == 1;
  return out;
}

ELProfile euler_lagrange_H(const GridFunction& beta, double h_ell, double h_i) {
  if (!(h_i > h_ell && h_ell >= 1.0)) {
    throw DomainError("euler_lagrange_H needs h_i > h_ell >= 1");
  }
  const double b0 = beta[0];
  const double span = beta[beta.size() - 1] - b0;
  if (!(span > 0.0)) throw DomainError("euler_lagrange_H needs increasing beta");
  const double phi_ell = phi_exp_integral(h_ell);
  const double D = (phi_ell - phi_exp_integral(h_i)) / span;
  std::vector<double> h(beta.size());
  h.front() = h_ell;
  h.back() = h_i;
  for (std::size_t j = 1; j + 1 < beta.size(); ++j) {
    const double target = phi_ell - D * (beta[j] - b0);
    if (!(target > 0.0 && target <= phi_ell)) {
      throw NumericalError("euler_lagrange_H: target " + number(target) +
                           " outside the range of the exponential integral");
    }
    h[j] = phi_exp_integral_inv(target);
  }
  return ELProfile{GridFunction(beta.lo(), beta.hi(), std::move(h), Interp::linear), D};
}

namespace {

struct Feedback {
  double s_prime;
  double dm;  // rho / s'
  double R;
  double psi;
  double r;
  double beta;
};

class FeedbackLaw {
 public:
  FeedbackLaw(const ProblemSpec& spec, double ell, double i0, std::size_t cells, double k)
      : spec_(spec),
        ell_(ell),
        k_(k),
        root_(GridLayout::uniform(ell, i0, 4 * cells + 1)
                  .sample([&spec](double x) { return std::sqrt(spec.rho_at(x)); },
                          Interp::linear)) {}

  double beta(double x) const { return root_(x); }

  Feedback operator()(double x, double S, double M) const {
    const double b = beta(x);
    const double rho = spec_.rho_at(x);
    const double r = M * S / (b * b);
    const auto conj = psi_star(k_ / S, r);
    const double sp = S * conj.argmin_R * std::sqrt(rho) / (b * conj.psi_at_R);
    if (!(sp > 0.0) || !std::isfinite(sp)) {
      throw NumericalError("feedback density not positive at level " + number(x));
    }
    return Feedback{sp, rho / sp, conj.argmin_R, conj.psi_at_R, r, b};
  }

 private:
  const ProblemSpec& spec_;
  double ell_;
  double k_;
  Antiderivative root_;
};

struct OdeRun {
  std::vector<double> S;
  std::vector<double> M;
};

// RK4 in tau = i0 - x from node n-1 down to node 1, `sub` steps per cell.
OdeRun integrate_down(const FeedbackLaw& law, const GridFunction& cells, double S0, double M0,
                      int sub, int max_refinements) {
  const std::size_t n = cells.size();
  OdeRun run{std::vector<double>(n, kNaN), std::vector<double>(n, kNaN)};
  run.S[n - 1] = S0;
  run.M[n - 1] = M0;

  std::function<void(double, double, double&, double&, int)> step =
      [&](double x, double h, double& S, double& M, int depth) {
        try {
          const auto k1 = law(x, S, M);
          const auto k2 = law(x - 0.5 * h, S + 0.5 * h * k1.s_prime, M + 0.5 * h * k1.dm);
          const auto k3 = law(x - 0.5 * h, S + 0.5 * h * k2.s_prime, M + 0.5 * h * k2.dm);
          const auto k4 = law(x - h, S + h * k3.s_prime, M + h * k3.dm);
          S += h * (k1.s_prime + 2 * k2.s_prime + 2 * k3.s_prime + k4.s_prime) / 6.0;
          M += h * (k1.dm + 2 * k2.dm + 2 * k3.dm + k4.dm) / 6.0;
        } catch (const std::runtime_error&) {
          if (depth >= max_refinements) throw;
          step(x, 0.5 * h, S, M, depth + 1);
          step(x - 0.5 * h, 0.5 * h, S, M, depth + 1);
        } catch (const std::domain_error&) {
          if (depth >= max_refinements) throw;
          step(x, 0.5 * h, S, M, depth + 1);
          step(x - 0.5 * h, 0.5 * h, S, M, depth + 1);
        }
      };

  double S = S0;
  double M = M0;
  for (std::size_t j = n - 1; j >= 2; --j) {
    const double x_hi = cells.node(j);
    const double h = (x_hi - cells.node(j - 1)) / sub;
    try {
      for (int q = 0; q < sub; ++q) step(x_hi - q * h, h, S, M, 0);
    } catch (const std::exception& e) {
      throw NumericalError("optimal_scale: integration failed below level " + number(x_hi) +
                           ": " + e.what());
    }
    run.S[j - 1] = S;
    run.M[j - 1] = M;
  }
  return run;
}

}  // namespace

OptimalScaleResult optimal_scale(const ProblemSpec& spec, const OptimalScaleOptions& options) {
  spec.validate();
  if (!(spec.i0 < 1.0)) throw ConfigError("optimal_scale needs i0 < 1");
  if (!(spec.f.min_value() > 0.0)) throw ConfigError("optimal_scale needs f > 0 on [0,1]");
  const double ell = spec.ell;
  const double i0 = spec.i0;
  const ScaleFunction s0 = ScaleFunction::initial(spec);
  const DiffusionMeasures m0(s0, spec);
  const std::size_t km = s0.density().piece_index(0.5 * (ell + i0));
  const GridFunction& mid = s0.density().piece(km);
  const std::size_t n = mid.size();
  if (n < 6) throw ConfigError("grid too coarse for the free interval (ell, i0)");

  const double k = ell > 0.0 ? s0.s(ell) : 0.0;
  const double c = ell > 0.0 ? m0.mf(ell) : 0.0;
  const double kappa = ell > 0.0 ? c * k - m0.p1(ell) : 0.0;
  const double S0 = s0.s_tilde(i0);
  const double M0 = m0.mf_tilde(i0);

  const FeedbackLaw law(spec, ell, i0, n - 1, k);
  OdeRun run = integrate_down(law, mid, S0, M0, options.richardson ? 2 : 1,
                              options.max_refinements);
  double richardson = 0.0;
  if (options.richardson) {
    const OdeRun coarse = integrate_down(law, mid, S0, M0, 1, options.max_refinements);
    for (std::size_t j = 1; j < n; ++j) {
      richardson = std::max(richardson, std::abs(coarse.S[j] - run.S[j]));
    }
  }

  OptimalScaleResult out{ScaleFunction(s0.density()), {}, {}, {}, {}, {}, {}, {}};
  out.level.resize(n);
  out.s_hat_prime.assign(n, kNaN);
  out.argmin_R.assign(n, kNaN);
  out.value_at.assign(n, kNaN);
  std::vector<double> ratio(n, kNaN);
  for (std::size_t j = 1; j < n; ++j) {
    const double x = mid.node(j);
    const auto fb = law(x, run.S[j], run.M[j]);
    out.s_hat_prime[j] = fb.s_prime;
    out.argmin_R[j] = fb.R;
    out.value_at[j] = kappa + run.S[j] * c + fb.beta * fb.beta * (fb.R * fb.r + fb.psi);
    ratio[j] = fb.R * std::sqrt(spec.rho_at(x)) / (fb.beta * fb.psi);
  }
  // The feedback density has a finite one-sided limit at ell.
  const double h = mid.step();
  auto extrapolate = [](const std::vector<double>& v) {
    return 4 * v[1] - 6 * v[2] + 4 * v[3] - v[4];
  };
  out.s_hat_prime[0] = extrapolate(out.s_hat_prime);
  const auto& sp = out.s_hat_prime;
  run.S[0] = run.S[1] + h * (9 * sp[0] + 19 * sp[1] - 5 * sp[2] + sp[3]) / 24.0;
  std::array<double, 4> q{};
  for (std::size_t j = 0; j < 4; ++j) q[j] = spec.rho_at(mid.node(j)) / sp[j];
  run.M[0] = run.M[1] + h * (9 * q[0] + 19 * q[1] - 5 * q[2] + q[3]) / 24.0;
  ratio[0] = sp[0] / run.S[0];
  out.level[0] = ell;
  for (std::size_t j = 1; j < n; ++j) out.level[j] = mid.node(j);
  {
    const double a0 = run.M[0];
    const double b0 = run.S[0];
    out.value_at[0] = kappa + b0 * c + a0 * b0 * gamma_delta(k / b0);
    out.argmin_R[0] = gamma_delta(k / b0);
  }
  out.s_tilde = run.S;
  out.mf_tilde = run.M;

  // Assemble the full density: s0 on C, the feedback law in between.
  std::vector<GridFunction> pieces = s0.density().pieces();
  pieces[km] = GridFunction(ell, i0, out.s_hat_prime, Interp::log_linear);
  out.scale = ScaleFunction(PiecewiseFunction(std::move(pieces)));

  // s~(i) = s~(i0) exp(int_i^{i0} R beta' / (beta Psi(R))).
  const auto tail = reverse_cumulative_integral(ratio, h);
  for (std::size_t j = 1; j < n; ++j) {
    const double pred = S0 * std::exp(tail[j]);
    out.exp_representation_gap =
        std::max(out.exp_representation_gap, std::abs(pred - run.S[j]) / run.S[j]);
  }

  const DiffusionMeasures mh(out.scale, spec);
  out.residual.assign(n, kNaN);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    out.residual[j] = delta_residual(mh, ell, out.level[j]);
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(out.residual[j]));
  }
  out.richardson_error = richardson;
  return out;
}

double delta_residual(const DiffusionMeasures& m, double ell, double i) {
  if (!(i > ell && i < 1.0)) throw DomainError("delta_residual needs ell < i < 1");
  const auto& s = m.scale();
  const double beta = beta_between(m, ell, i);
  const double S = s.s_tilde(i);
  const double M = m.mf_tilde(i);
  const double k = ell > 0.0 ? s.s(ell) : 0.0;
  const auto conj = psi_star(k / S, M * S / (beta * beta));
  const double R = conj.argmin_R;
  const double psi_r = conj.psi_at_R;
  const double sp = s.prime(i, Side::left);
  const double rho = m.rho(i, Side::left);
  return 2.0 * beta * std::sqrt(rho) * psi_r - (sp / S) * beta * beta * psi_r * psi_r / R -
         rho * R * S / sp;
}

double delta_residual(const ScaleFunction& s, const ProblemSpec& spec, double i) {
  return delta_residual(DiffusionMeasures(s, spec), spec.ell, i);
}

ValueSurface::ValueSurface(const DiffusionMeasures& m, double ell, double i0)
    : m_(m), ell_(ell), i0_(i0) {
  c_ = ell > 0.0 ? m_.mf(ell) : 0.0;
  kappa_ = ell > 0.0 ? c_ * m_.scale().s(ell) - m_.p1(ell) : 0.0;
}

double ValueSurface::frontier_value(double i) const {
  const double ie = std::min(i, i0_);
  if (ie <= ell_) return static_cost(m_, ie);
  return value_V(m_, ell_, ie).value;
}

double ValueSurface::pre(double i, double x) const {
  const double ie = std::min(i, i0_);
  if (ie <= ell_) return static_cost(m_, x);
  if (x < ie - 1e-12) throw DomainError("value surface needs x >= frontier before T1");
  const auto& s = m_.scale();
  const double vi = value_V(m_, ell_, ie).value;
  return (m_.p2(x) - m_.p2(ie)) + (s.s_tilde(x) / s.s_tilde(ie)) * (vi - kappa_) + kappa_;
}

double ValueSurface::post(double i, double x) const {
  if (i <= ell_) return m_.p2(x);
  if (x >= i) return m_.p2(x) - m_.p2(i) + kappa_;
  if (x > ell_) return kappa_;
  return after_reset(x);
}

double ValueSurface::after_reset(double x) const {
  if (ell_ == 0.0) return 0.0;
  return c_ * m_.scale().s(x) - m_.p1(x);
}

double value_surface(const DiffusionMeasures& m, double ell, double i0, double i, double x,
                     Phase phase) {
  return ValueSurface(m, ell, i0)(i, x, phase);
}

}  // namespace commute
