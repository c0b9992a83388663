// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace commute {

enum class Interp { linear, log_linear };

/// Which one-sided value to return when a piecewise function is evaluated
/// exactly at an interior breakpoint.
enum class Side { left, right };

/// A real function sampled at `n` uniform nodes on [lo, hi].
///
/// Values are interpolated linearly, or linearly in log-space when the mode
/// is `log_linear` (all values must then be strictly positive). Evaluation
/// outside [lo, hi] throws DomainError.
class GridFunction {
 public:
  GridFunction(double lo, double hi, std::vector<double> values,
               Interp mode = Interp::linear);

  static GridFunction sample(double lo, double hi, std::size_t n,
                             const std::function<double(double)>& fn,
                             Interp mode = Interp::linear);

  double operator()(double x) const;

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return values_.size(); }
  double step() const { return step_; }
  double node(std::size_t j) const;
  Interp mode() const { return mode_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  bool contains(double x) const;

  /// Index j of the cell [x_j, x_{j+1}] containing x, and the fraction
  /// (x - x_j) / step in [0, 1].
  std::pair<std::size_t, double> locate(double x) const;

 private:
  double lo_;
  double hi_;
  double step_;
  std::vector<double> values_;
  std::vector<double> logs_;
  Interp mode_;
};

/// Contiguous pieces covering an interval; each piece carries its own
/// uniform grid, so jumps are allowed at interior breakpoints.
class PiecewiseFunction {
 public:
  explicit PiecewiseFunction(std::vector<GridFunction> pieces);
  PiecewiseFunction(GridFunction single);  // NOLINT(google-explicit-constructor)

  double operator()(double x, Side side = Side::right) const;

  std::size_t piece_count() const { return pieces_.size(); }
  const GridFunction& piece(std::size_t k) const { return pieces_[k]; }
  const std::vector<GridFunction>& pieces() const { return pieces_; }
  double lo() const { return pieces_.front().lo(); }
  double hi() const { return pieces_.back().hi(); }
  std::vector<double> breakpoints() const;

  /// Piece holding x; at an interior breakpoint `side` decides.
  std::size_t piece_index(double x, Side side = Side::right) const;

  /// New function on the same nodes; `fn(x, k, j)` gives the value at node j
  /// of piece k.
  PiecewiseFunction map_nodes(
      const std::function<double(double, std::size_t, std::size_t)>& fn,
      Interp mode) const;

 private:
  std::vector<GridFunction> pieces_;
};

/// Breakpoints plus a target node spacing; builds piece grids that share
/// the spacing as closely as the breakpoints allow.
struct GridLayout {
  std::vector<double> breakpoints;  // strictly increasing, first = lo, last = hi
  double target_step;

  static GridLayout uniform(double lo, double hi, std::size_t n);
  /// [0,1] split at the given interior points (duplicates and endpoints dropped).
  static GridLayout unit(std::size_t n, std::vector<double> interior);

  PiecewiseFunction sample(const std::function<double(double, Side)>& fn,
                           Interp mode) const;
  PiecewiseFunction sample(const std::function<double(double)>& fn,
                           Interp mode) const;
};

/// Fourth-order cumulative integral of node samples with spacing h.
/// Interior cells use the cubic rule h(-f_{j-1} + 13 f_j + 13 f_{j+1} - f_{j+2})/24,
/// one-sided cubics at the ends; fewer than four nodes fall back to trapezoid.
std::vector<double> cumulative_integral(std::span<const double> values, double h);

/// Same rule accumulated from the right: result[j] = integral from x_j to x_{n-1}.
std::vector<double> reverse_cumulative_integral(std::span<const double> values,
                                                double h);

/// Integral of the local interpolating cubic over [x_j, x_j + theta h].
double partial_cell_integral(std::span<const double> values, double h,
                             std::size_t j, double theta);

/// Antiderivative of a piecewise integrand: forward F(x) = int_lo^x and an
/// independently accumulated tail T(x) = int_x^hi.
class Antiderivative {
 public:
  explicit Antiderivative(const PiecewiseFunction& integrand);

  double operator()(double x) const;  // int_lo^x
  double tail(double x) const;        // int_x^hi
  double total() const { return total_; }
  double between(double a, double b) const { return (*this)(b) - (*this)(a); }

  /// Node values of F (and of the tail) on piece k.
  std::span<const double> node_values(std::size_t k) const { return prefix_[k]; }
  std::span<const double> node_tail_values(std::size_t k) const { return suffix_[k]; }

 private:
  PiecewiseFunction integrand_;
  std::vector<std::vector<double>> prefix_;
  std::vector<std::vector<double>> suffix_;
  double total_;
};

/// Fourth-order central first derivative at the nodes of a grid function
/// (one-sided fourth-order stencils at the two ends of the grid).
std::vector<double> node_derivative(std::span<const double> values, double h);

}  // namespace commute
