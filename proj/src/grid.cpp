// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commute/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "commute/errors.hpp"

namespace commute {

namespace {

constexpr double kEdgeSlack = 1e-12;

std::string range_message(double x, double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << "evaluation at " << x << " outside [" << lo << ", " << hi << "]";
  return os.str();
}

// Integral of the cubic through four equally spaced samples g[0..3] (nodes
// 0,1,2,3 in units of h) over [u0, u0 + w], u0 and w in units of h.
double cubic_segment(const double* g, double u0, double w) {
  static const double kGauss = 0.5 / std::sqrt(3.0);
  auto eval = [g](double u) {
    const double l0 = -(u - 1) * (u - 2) * (u - 3) / 6.0;
    const double l1 = u * (u - 2) * (u - 3) / 2.0;
    const double l2 = -u * (u - 1) * (u - 3) / 2.0;
    const double l3 = u * (u - 1) * (u - 2) / 6.0;
    return g[0] * l0 + g[1] * l1 + g[2] * l2 + g[3] * l3;
  };
  const double mid = u0 + 0.5 * w;
  return 0.5 * w * (eval(mid - kGauss * w) + eval(mid + kGauss * w));
}

std::vector<double> cell_integrals(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> cells(n > 1 ? n - 1 : 0);
  if (n < 4) {
    for (std::size_t j = 0; j + 1 < n; ++j) cells[j] = 0.5 * h * (f[j] + f[j + 1]);
    return cells;
  }
  cells[0] = h * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24.0;
  for (std::size_t j = 1; j + 2 < n; ++j) {
    cells[j] = h * (-f[j - 1] + 13 * f[j] + 13 * f[j + 1] - f[j + 2]) / 24.0;
  }
  cells[n - 2] = h * (f[n - 4] - 5 * f[n - 3] + 19 * f[n - 2] + 9 * f[n - 1]) / 24.0;
  return cells;
}

}  // namespace

GridFunction::GridFunction(double lo, double hi, std::vector<double> values,
                           Interp mode)
    : lo_(lo), hi_(hi), values_(std::move(values)), mode_(mode) {
  if (!(lo < hi)) throw DomainError("grid function needs lo < hi");
  if (values_.size() < 2) throw DomainError("grid function needs at least 2 nodes");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("grid function values must be finite");
  }
  step_ = (hi_ - lo_) / static_cast<double>(values_.size() - 1);
  if (mode_ == Interp::log_linear) {
    logs_.reserve(values_.size());
    for (double v : values_) {
      if (!(v > 0)) throw DomainError("log-linear grid function needs positive values");
      logs_.push_back(std::log(v));
    }
  }
}

GridFunction GridFunction::sample(double lo, double hi, std::size_t n,
                                  const std::function<double(double)>& fn,
                                  Interp mode) {
  if (n < 2) throw DomainError("grid function needs at least 2 nodes");
  std::vector<double> v(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    v[j] = fn(j + 1 == n ? hi : lo + h * static_cast<double>(j));
  }
  return GridFunction(lo, hi, std::move(v), mode);
}

double GridFunction::node(std::size_t j) const {
  return j + 1 == values_.size() ? hi_ : lo_ + step_ * static_cast<double>(j);
}

bool GridFunction::contains(double x) const {
  const double slack = kEdgeSlack * std::max(1.0, hi_ - lo_);
  return x >= lo_ - slack && x <= hi_ + slack;
}

std::pair<std::size_t, double> GridFunction::locate(double x) const {
  if (!contains(x)) throw DomainError(range_message(x, lo_, hi_));
  const double u = std::clamp((x - lo_) / step_, 0.0,
                              static_cast<double>(values_.size() - 1));
  auto j = static_cast<std::size_t>(u);
  if (j + 1 >= values_.size()) j = values_.size() - 2;
  return {j, u - static_cast<double>(j)};
}

double GridFunction::operator()(double x) const {
  const auto [j, theta] = locate(x);
  if (theta == 0.0) return values_[j];
  if (theta == 1.0) return values_[j + 1];
  if (mode_ == Interp::log_linear) {
    return std::exp(logs_[j] + theta * (logs_[j + 1] - logs_[j]));
  }
  return values_[j] + theta * (values_[j + 1] - values_[j]);
}

PiecewiseFunction::PiecewiseFunction(std::vector<GridFunction> pieces)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw DomainError("piecewise function needs a piece");
  for (std::size_t k = 1; k < pieces_.size(); ++k) {
    if (std::abs(pieces_[k].lo() - pieces_[k - 1].hi()) > kEdgeSlack) {
      throw DomainError("piecewise function pieces must be contiguous");
    }
  }
}

PiecewiseFunction::PiecewiseFunction(GridFunction single)
    : pieces_{std::move(single)} {}

std::vector<double> PiecewiseFunction::breakpoints() const {
  std::vector<double> out;
  out.reserve(pieces_.size() + 1);
  for (const auto& p : pieces_) out.push_back(p.lo());
  out.push_back(pieces_.back().hi());
  return out;
}

std::size_t PiecewiseFunction::piece_index(double x, Side side) const {
  if (!pieces_.front().contains(x) && x < pieces_.front().lo()) {
    throw DomainError(range_message(x, lo(), hi()));
  }
  if (x > hi() && !pieces_.back().contains(x)) {
    throw DomainError(range_message(x, lo(), hi()));
  }
  const std::size_t last = pieces_.size() - 1;
  for (std::size_t k = 0; k < last; ++k) {
    const double b = pieces_[k].hi();
    if (x < b) return k;
    if (x == b) return side == Side::left ? k : k + 1;
  }
  return last;
}

double PiecewiseFunction::operator()(double x, Side side) const {
  return pieces_[piece_index(x, side)](x);
}

PiecewiseFunction PiecewiseFunction::map_nodes(
    const std::function<double(double, std::size_t, std::size_t)>& fn,
    Interp mode) const {
  std::vector<GridFunction> out;
  out.reserve(pieces_.size());
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const auto& p = pieces_[k];
    std::vector<double> v(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) v[j] = fn(p.node(j), k, j);
    out.emplace_back(p.lo(), p.hi(), std::move(v), mode);
  }
  return PiecewiseFunction(std::move(out));
}

GridLayout GridLayout::uniform(double lo, double hi, std::size_t n) {
  if (n < 2) throw DomainError("grid needs at least 2 nodes");
  return GridLayout{{lo, hi}, (hi - lo) / static_cast<double>(n - 1)};
}

GridLayout GridLayout::unit(std::size_t n, std::vector<double> interior) {
  GridLayout g = uniform(0.0, 1.0, n);
  std::sort(interior.begin(), interior.end());
  for (double x : interior) {
    if (x > g.breakpoints[g.breakpoints.size() - 2] && x < 1.0) {
      g.breakpoints.insert(g.breakpoints.end() - 1, x);
    }
  }
  return g;
}

PiecewiseFunction GridLayout::sample(const std::function<double(double, Side)>& fn,
                                     Interp mode) const {
  std::vector<GridFunction> pieces;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double a = breakpoints[k];
    const double b = breakpoints[k + 1];
    const auto cells = static_cast<std::size_t>(std::llround((b - a) / target_step));
    const std::size_t n = std::max<std::size_t>(4, cells + 1);
    const double h = (b - a) / static_cast<double>(n - 1);
    std::vector<double> v(n);
    v[0] = fn(a, Side::right);
    for (std::size_t j = 1; j + 1 < n; ++j) v[j] = fn(a + h * static_cast<double>(j), Side::right);
    v[n - 1] = fn(b, Side::left);
    pieces.emplace_back(a, b, std::move(v), mode);
  }
  return PiecewiseFunction(std::move(pieces));
}

PiecewiseFunction GridLayout::sample(const std::function<double(double)>& fn,
                                     Interp mode) const {
  return sample([&fn](double x, Side) { return fn(x); }, mode);
}

std::vector<double> cumulative_integral(std::span<const double> values, double h) {
  const auto cells = cell_integrals(values, h);
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t j = 0; j < cells.size(); ++j) out[j + 1] = out[j] + cells[j];
  return out;
}

std::vector<double> reverse_cumulative_integral(std::span<const double> values,
                                                double h) {
  const auto cells = cell_integrals(values, h);
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t j = cells.size(); j-- > 0;) out[j] = out[j + 1] + cells[j];
  return out;
}

double partial_cell_integral(std::span<const double> values, double h,
                             std::size_t j, double theta) {
  const std::size_t n = values.size();
  if (theta <= 0.0) return 0.0;
  if (n < 4) {
    const double mid = values[j] + 0.5 * theta * (values[j + 1] - values[j]);
    return h * theta * mid;
  }
  const std::size_t m0 = std::min(j > 0 ? j - 1 : 0, n - 4);
  return h * cubic_segment(values.data() + m0, static_cast<double>(j - m0), theta);
}

Antiderivative::Antiderivative(const PiecewiseFunction& integrand)
    : integrand_(integrand) {
  const std::size_t np = integrand_.piece_count();
  prefix_.resize(np);
  suffix_.resize(np);
  for (std::size_t k = 0; k < np; ++k) {
    const auto& p = integrand_.piece(k);
    prefix_[k] = cumulative_integral(p.values(), p.step());
    suffix_[k] = reverse_cumulative_integral(p.values(), p.step());
  }
  for (std::size_t k = 1; k < np; ++k) {
    const double off = prefix_[k - 1].back();
    for (double& v : prefix_[k]) v += off;
  }
  for (std::size_t k = np - 1; k-- > 0;) {
    const double off = suffix_[k + 1].front();
    for (double& v : suffix_[k]) v += off;
  }
  total_ = prefix_.back().back();
}

double Antiderivative::operator()(double x) const {
  const std::size_t k = integrand_.piece_index(x, Side::left);
  const auto& p = integrand_.piece(k);
  const auto [j, theta] = p.locate(x);
  return prefix_[k][j] + partial_cell_integral(p.values(), p.step(), j, theta);
}

double Antiderivative::tail(double x) const {
  const std::size_t k = integrand_.piece_index(x, Side::right);
  const auto& p = integrand_.piece(k);
  const auto [j, theta] = p.locate(x);
  if (theta == 0.0) return suffix_[k][j];
  const double cell = suffix_[k][j] - suffix_[k][j + 1];
  return suffix_[k][j + 1] + (cell - partial_cell_integral(p.values(), p.step(), j, theta));
}

std::vector<double> node_derivative(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n < 5) {
    if (n == 2) {
      d[0] = d[1] = (f[1] - f[0]) / h;
      return d;
    }
    d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
    for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2 * h);
    d[n - 1] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) / (2 * h);
    return d;
  }
  const double w = 12 * h;
  d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / w;
  d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / w;
  for (std::size_t j = 2; j + 2 < n; ++j) {
    d[j] = (f[j - 2] - 8 * f[j - 1] + 8 * f[j + 1] - f[j + 2]) / w;
  }
  d[n - 2] = (3 * f[n - 1] + 10 * f[n - 2] - 18 * f[n - 3] + 6 * f[n - 4] - f[n - 5]) / w;
  d[n - 1] = (25 * f[n - 1] - 48 * f[n - 2] + 36 * f[n - 3] - 16 * f[n - 4] + 3 * f[n - 5]) / w;
  return d;
}

}  // namespace commute
