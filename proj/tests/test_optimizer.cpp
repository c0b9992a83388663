// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "commute/errors.hpp"
#include "commute/optimizer.hpp"
#include "commute/special.hpp"
#include "oracles.hpp"

using namespace commute;

namespace {

ProblemSpec reference(std::size_t n = 2049) {
  ProblemSpec sp;
  sp.ell = 0.25;
  sp.i0 = 0.75;
  sp.grid_n = n;
  return sp;
}

// min over y >= 1 of ab p(y) + beta^2 / int_{1+delta/y}^{p(y)} e^{p-u}/u du.
double value_oracle(double kappa, double bc, double a, double b, double k, double beta) {
  const double delta = k / b;
  auto obj = [&](double lny) {
    const double y = std::exp(lny);
    const double w = 1.0 + delta / y;
    const double p = w + lny;
    const double I = oracle::integrate([p](double u) { return std::exp(p - u) / u; }, w, p);
    return a * b * p + beta * beta / I;
  };
  const double u = oracle::golden_min(obj, 1e-9, 10.0, 1e-13);
  return kappa + bc + obj(u);
}

ScaleFunction candidate(const ProblemSpec& sp, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> amp(5);
  for (double& v : amp) v = 0.6 * g(rng);
  const double shift = g(rng);
  return ScaleFunction::from_density(sp.layout(), [&](double x, Side side) {
    const bool inside = (x > sp.ell && x < sp.i0) || (x == sp.ell && side == Side::right) ||
                        (x == sp.i0 && side == Side::left);
    if (!inside) return sp.s0_prime(x);
    const double u = (x - sp.ell) / (sp.i0 - sp.ell);
    double e = shift;
    for (std::size_t q = 0; q < amp.size(); ++q) e += amp[q] * std::sin((q + 1) * M_PI * u + q);
    return std::exp(e);
  });
}

}  // namespace

TEST_CASE("two value routes on the reference instance") {
  const auto sp = reference();
  const auto s = ScaleFunction::initial(sp);
  const DiffusionMeasures m(s, sp);
  const auto v = value_V(m, 0.25, 0.75);
  const auto t = value_by_t_search(m, 0.25, 0.75);
  CHECK(std::abs(v.value - t.value) < 1e-10);
  CHECK_FALSE(t.at_boundary);
  CHECK(v.beta == doctest::Approx(std::sqrt(2.0) * 0.5).epsilon(1e-12));
  const double want = value_oracle(0.0625, 0.125, 0.5, 0.25, 0.25, std::sqrt(2.0) * 0.5);
  CHECK(v.value == doctest::Approx(want).epsilon(1e-9));
  CHECK(std::abs(v.value - 0.706046) < 1e-6);
  CHECK(v.value < 0.9375);
}

TEST_CASE("value is below every candidate reset payoff") {
  const auto sp = reference();
  std::mt19937_64 rng(5);
  const double V = value_V(sp, ScaleFunction::initial(sp), sp.i0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto c = candidate(sp, rng);
    CHECK(value_V(sp, c, sp.i0) == doctest::Approx(V).epsilon(1e-12));
    CHECK(V <= payoff_sstar(c, sp, sp.ell, sp.i0) + 1e-9);
  }
}

TEST_CASE("Euler-Lagrange profile") {
  const double ell = 0.25;
  const double i = 0.75;
  const std::size_t n = 4097;
  const auto beta = GridFunction::sample(ell, i, n, [&](double y) { return std::sqrt(2.0) * (y - ell); });
  const auto el = euler_lagrange_H(beta, 1.2, 2.0);
  CHECK(el.H(ell) == doctest::Approx(1.2).epsilon(1e-10));
  CHECK(el.H(i) == doctest::Approx(2.0).epsilon(1e-10));
  for (std::size_t j = 1; j < n; ++j) CHECK(el.H[j] > el.H[j - 1]);
  // Integrated form: phi(H) is affine in beta.
  for (std::size_t j = 1; j + 1 < n; j += 64) {
    const double lhs = phi_exp_integral(el.H[j]) - phi_exp_integral(1.2);
    CHECK(std::abs(lhs + el.D * beta[j]) < 1e-13);
  }
  CHECK_THROWS_AS(euler_lagrange_H(beta, 2.0, 1.2), DomainError);
}

TEST_CASE("Euler-Lagrange functional is stationary") {
  const double ell = 0.25;
  const double i = 0.75;
  const double rho = 2.0;
  const auto beta = GridFunction::sample(ell, i, 9, [&](double y) { return std::sqrt(rho) * (y - ell); });
  const auto el = euler_lagrange_H(beta, 1.2, 2.0);
  const double phi0 = phi_exp_integral(1.2);
  auto H = [&](double y) { return phi_exp_integral_inv(phi0 - el.D * std::sqrt(rho) * (y - ell)); };
  auto Hp = [&](double y) {
    const double h = H(y);
    return el.D * std::sqrt(rho) * h * std::exp(h);
  };
  auto J = [&](const std::function<double(double)>& eta, const std::function<double(double)>& deta,
               double eps) {
    return oracle::simpson(
        [&](double y) {
          const double h = H(y) + eps * eta(y);
          return rho * h * std::exp(h) / (Hp(y) + eps * deta(y));
        },
        ell, i, 4000);
  };
  auto zero = [](double) { return 0.0; };
  const double j0 = J(zero, zero, 0.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double a1 = g(rng);
    const double a2 = g(rng);
    const double a3 = g(rng);
    const double w = M_PI / (i - ell);
    auto eta = [=](double y) {
      const double u = w * (y - ell);
      return a1 * std::sin(u) + a2 * std::sin(2 * u) + a3 * std::sin(3 * u);
    };
    auto deta = [=](double y) {
      const double u = w * (y - ell);
      return w * (a1 * std::cos(u) + 2 * a2 * std::cos(2 * u) + 3 * a3 * std::cos(3 * u));
    };
    CHECK(J(eta, deta, 1e-3) >= j0 - 1e-8);
  }
}

TEST_CASE("optimal scale on the reference instance") {
  const auto sp = reference();
  const auto opt = optimal_scale(sp);
  const std::size_t n = opt.level.size();
  REQUIRE(n > 10);
  CHECK(opt.level.front() == 0.25);
  CHECK(opt.level.back() == 0.75);
  CHECK(opt.richardson_error < 1e-6);
  CHECK(opt.exp_representation_gap < 1e-6);
  CHECK(opt.max_abs_residual <= 1e-6);
  CHECK(std::isnan(opt.residual.front()));
  CHECK(std::isnan(opt.residual.back()));
  const double V0 = value_V(sp, ScaleFunction::initial(sp), 0.75);
  CHECK(opt.value_at.back() == doctest::Approx(V0).epsilon(1e-6));
  // The reset policy on the feedback scale attains the value.
  CHECK(payoff_sstar(opt.scale, sp, 0.25, 0.75) == doctest::Approx(V0).epsilon(1e-6));
  const DiffusionMeasures mh(opt.scale, sp);
  for (std::size_t j : {1ul, n / 3, n / 2, n - 2}) {
    CHECK(value_V(mh, 0.25, opt.level[j]).value == doctest::Approx(opt.value_at[j]).epsilon(1e-6));
  }
  for (std::size_t j = 0; j < n; ++j) CHECK(opt.s_hat_prime[j] > 0.0);
  CHECK(opt.s_tilde.back() == doctest::Approx(0.25));
}

TEST_CASE("residual is negative off the optimum") {
  const auto sp = reference();
  const auto opt = optimal_scale(sp);
  const DiffusionMeasures m0(ScaleFunction::initial(sp), sp);
  for (double x : {0.3, 0.5, 0.7}) CHECK(delta_residual(m0, 0.25, x) <= 1e-9);
  for (double amp : {0.1, -0.1}) {
    const auto pert = opt.scale.density().map_nodes(
        [&](double x, std::size_t k, std::size_t j) {
          const double v = opt.scale.density().piece(k)[j];
          if (x <= sp.ell || x >= sp.i0) return v;
          return v * (1.0 + amp * std::sin(8.0 * M_PI * (x - sp.ell) / (sp.i0 - sp.ell)));
        },
        Interp::log_linear);
    const DiffusionMeasures mp(ScaleFunction(pert), sp);
    int negative = 0;
    int total = 0;
    for (std::size_t j = 2; j + 2 < opt.level.size(); j += 16) {
      ++total;
      if (delta_residual(mp, 0.25, opt.level[j]) < -1e-8) ++negative;
      CHECK(delta_residual(mp, 0.25, opt.level[j]) <= 1e-9);
    }
    CHECK(2 * negative > total);
  }
}

TEST_CASE("optimal scale rejects unsupported input") {
  auto sp = reference();
  sp.i0 = 1.0;
  CHECK_THROWS_AS(optimal_scale(sp), ConfigError);
  sp = reference();
  sp.f = Profile::affine(0.0, 1.0);
  CHECK_THROWS_AS(optimal_scale(sp), ConfigError);
}

TEST_CASE("degenerate value at ell") {
  const auto sp = reference();
  const DiffusionMeasures m(ScaleFunction::initial(sp), sp);
  const auto d = value_V(m, 0.25, 0.25);
  CHECK(d.degenerate);
  const auto& c = d.consts;
  CHECK(d.value == doctest::Approx(c.kappa + c.b * c.c + c.a * c.b * (1.0 + d.delta)));
  CHECK(d.value > c.kappa + c.b * c.c);
  CHECK(value_V(m, 0.25, 0.25 + 1e-7).value == doctest::Approx(d.value).epsilon(1e-5));
}

TEST_CASE("value surface") {
  const auto sp = reference();
  const auto opt = optimal_scale(sp);
  const DiffusionMeasures m(opt.scale, sp);
  const ValueSurface vs(m, 0.25, 0.75);
  const auto bc = boundary_constants(m, 0.25, 0.75);
  for (double i : {0.3, 0.5, 0.75}) {
    CHECK(vs.pre(i, i) == doctest::Approx(value_V(m, 0.25, i).value).epsilon(1e-12));
    CHECK(vs.pre(i, i) == doctest::Approx(vs.frontier_value(i)));
  }
  for (double x : {0.26, 0.4, 0.5}) CHECK(vs.post(0.5, x) == doctest::Approx(bc.kappa));
  CHECK(vs.after_reset(0.25) == doctest::Approx(bc.kappa).epsilon(1e-12));
  CHECK(vs.post(0.5, 0.2499999) == doctest::Approx(bc.kappa).epsilon(1e-6));
  CHECK(vs.post(0.5, 0.5) == doctest::Approx(bc.kappa));
  CHECK(vs.post(0.5, 1.0) == doctest::Approx(phi_cost(m, 1.0, 0.5) + bc.kappa));
  CHECK(vs.after_reset(0.0) == doctest::Approx(phi_cost(m, 0.0, 0.0)));
  CHECK(vs.pre(0.9, 0.95) == doctest::Approx(vs.pre(0.75, 0.95)));
  CHECK(value_surface(m, 0.25, 0.75, 0.5, 0.6, Phase::pre_t1) == doctest::Approx(vs.pre(0.5, 0.6)));
  CHECK_THROWS_AS(vs.pre(0.5, 0.4), DomainError);
}
