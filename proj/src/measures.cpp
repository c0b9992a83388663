// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commute/measures.hpp"

#include <algorithm>
#include <cmath>

#include "commute/errors.hpp"

namespace commute {

ScaleFunction::ScaleFunction(PiecewiseFunction s_prime)
    : s_prime_(std::move(s_prime)), integral_(s_prime_) {
  for (const auto& p : s_prime_.pieces()) {
    for (double v : p.values()) {
      if (!(v > 0.0)) throw DomainError("scale density must be strictly positive");
    }
  }
}

ScaleFunction ScaleFunction::from_density(
    const GridLayout& layout, const std::function<double(double, Side)>& density) {
  return ScaleFunction(layout.sample(density, Interp::log_linear));
}

ScaleFunction ScaleFunction::from_profile(const GridLayout& layout, const Profile& density) {
  return ScaleFunction(layout.sample([&density](double x) { return density(x); },
                                     Interp::log_linear));
}

ScaleFunction ScaleFunction::initial(const ProblemSpec& spec) {
  return from_profile(spec.layout(), spec.s0_prime);
}

double ScaleFunction::inverse(double y, double hint) const {
  if (y <= 0.0) return 0.0;
  if (y >= total()) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  double x = std::clamp(hint, 0.0, 1.0);
  for (int it = 0; it < 60; ++it) {
    const double r = s(x) - y;
    if (r > 0.0) hi = x; else lo = x;
    if (std::abs(r) <= 1e-15 * total() || hi - lo <= 1e-15) break;
    const double xn = x - r / prime(x, r > 0.0 ? Side::left : Side::right);
    x = (xn > lo && xn < hi) ? xn : 0.5 * (lo + hi);
  }
  return x;
}

namespace {

PiecewiseFunction rho_on(const PiecewiseFunction& like, const ProblemSpec& spec) {
  return like.map_nodes([&spec](double x, std::size_t, std::size_t) { return spec.rho_at(x); },
                        spec.f.min_value() > 0.0 ? Interp::log_linear : Interp::linear);
}

}  // namespace

DiffusionMeasures::DiffusionMeasures(const ScaleFunction& scale, const ProblemSpec& spec)
    : scale_(scale),
      rho_(rho_on(scale.density(), spec)),
      mf_prime_(scale.density().map_nodes(
          [&](double, std::size_t k, std::size_t j) {
            return rho_.piece(k)[j] / scale.density().piece(k)[j];
          },
          Interp::linear)),
      mf_(mf_prime_),
      p1_(scale.density().map_nodes(
          [&](double, std::size_t k, std::size_t j) {
            return scale.density().piece(k)[j] * mf_.node_values(k)[j];
          },
          Interp::linear)),
      p2_(scale.density().map_nodes(
          [&](double, std::size_t k, std::size_t j) {
            return scale.density().piece(k)[j] * mf_.node_tail_values(k)[j];
          },
          Interp::linear)),
      root_rho_(rho_.map_nodes(
          [&](double, std::size_t k, std::size_t j) { return std::sqrt(rho_.piece(k)[j]); },
          Interp::linear)) {}

ScaleFunction scale_from_drift(const GridLayout& layout, const Profile& mu,
                               const Profile& sigma) {
  if (!(sigma.min_value() > 0.0)) throw DomainError("sigma must be strictly positive");
  const auto ratio = layout.sample(
      [&](double x) {
        const double s = sigma(x);
        return mu(x) / (s * s);
      },
      Interp::linear);
  const Antiderivative integral(ratio);
  return ScaleFunction(ratio.map_nodes(
      [&integral](double x, std::size_t, std::size_t) { return std::exp(-2.0 * integral(x)); },
      Interp::log_linear));
}

PiecewiseFunction rho(const ProblemSpec& spec) {
  spec.validate();
  return spec.layout().sample([&spec](double x) { return spec.rho_at(x); },
                              spec.f.min_value() > 0.0 ? Interp::log_linear : Interp::linear);
}

GridFunction beta(const ProblemSpec& spec) {
  spec.validate();
  const auto layout = GridLayout::uniform(spec.ell, 1.0, spec.grid_n);
  const auto root = layout.sample([&spec](double x) { return std::sqrt(spec.rho_at(x)); },
                                  Interp::linear);
  const Antiderivative b(root);
  const auto& piece = root.piece(0);
  std::vector<double> v(b.node_values(0).begin(), b.node_values(0).end());
  return GridFunction(piece.lo(), piece.hi(), std::move(v), Interp::linear);
}

MfPair mf_measures(const ScaleFunction& s, const ProblemSpec& spec) {
  const DiffusionMeasures m(s, spec);
  const auto& d = s.density();
  return {d.map_nodes([&m](double x, std::size_t, std::size_t) { return m.mf(x); },
                      Interp::linear),
          d.map_nodes([&m](double x, std::size_t, std::size_t) { return m.mf_tilde(x); },
                      Interp::linear)};
}

double phi_cost(const DiffusionMeasures& m, double x, double y) {
  if (x == y) return 0.0;
  if (x < y) return m.p1(y) - m.p1(x);
  return m.p2(x) - m.p2(y);
}

double phi_cost(const ScaleFunction& s, const ProblemSpec& spec, double x, double y) {
  if (x == y) return 0.0;
  return phi_cost(DiffusionMeasures(s, spec), x, y);
}

double commute_identity_gap(const DiffusionMeasures& m) {
  const double lhs = phi_cost(m, 0.0, 1.0) + phi_cost(m, 1.0, 0.0);
  return std::abs(lhs - m.scale().total() * m.mf_total());
}

double commute_identity_gap(const ScaleFunction& s, const ProblemSpec& spec) {
  return commute_identity_gap(DiffusionMeasures(s, spec));
}

}  // namespace commute
