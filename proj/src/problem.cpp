// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commute/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "commute/errors.hpp"

namespace commute {

Profile Profile::constant(double c) {
  Profile p;
  p.kind_ = Kind::constant;
  p.p0_ = c;
  return p;
}

Profile Profile::affine(double a, double b) {
  Profile p;
  p.kind_ = Kind::affine;
  p.p0_ = a;
  p.p1_ = b;
  return p;
}

Profile Profile::exponential(double c, double k) {
  Profile p;
  p.kind_ = Kind::exponential;
  p.p0_ = c;
  p.p1_ = k;
  return p;
}

Profile Profile::tabulated(std::vector<double> values) {
  Profile p;
  p.kind_ = Kind::tabulated;
  p.table_.emplace(0.0, 1.0, std::move(values), Interp::linear);
  return p;
}

double Profile::tabulated_at(double x) const { return (*table_)(std::clamp(x, 0.0, 1.0)); }

double Profile::min_value() const {
  if (kind_ == Kind::tabulated) {
    const auto v = table_->values();
    return *std::min_element(v.begin(), v.end());
  }
  return std::min((*this)(0.0), (*this)(1.0));
}

double Profile::max_value() const {
  if (kind_ == Kind::tabulated) {
    const auto v = table_->values();
    return *std::max_element(v.begin(), v.end());
  }
  return std::max((*this)(0.0), (*this)(1.0));
}

std::string Profile::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::constant: os << "constant " << p0_; break;
    case Kind::affine: os << "affine " << p0_ << " + " << p1_ << " x"; break;
    case Kind::exponential: os << "exponential " << p0_ << " exp(" << p1_ << " x)"; break;
    case Kind::tabulated: os << "tabulated, " << table_->size() << " nodes"; break;
  }
  return os.str();
}

void ProblemSpec::validate() const {
  if (!(ell >= 0.0 && ell < i0 && i0 <= 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "need 0 <= ell < i0 <= 1, got ell = " << ell << ", i0 = " << i0;
    throw ConfigError(os.str());
  }
  if (grid_n < 8) throw ConfigError("grid_n must be at least 8");
  if (!(sigma.min_value() > 0.0)) throw ConfigError("sigma must be strictly positive on [0,1]");
  if (!(f.min_value() >= 0.0)) throw ConfigError("f must be nonnegative on [0,1]");
  if (!(f.max_value() > 0.0)) throw ConfigError("f must be positive somewhere on [0,1]");
  if (!(s0_prime.min_value() > 0.0)) throw ConfigError("s0_prime must be strictly positive on [0,1]");
  for (const Profile* p : {&sigma, &f, &s0_prime}) {
    if (!std::isfinite(p->min_value()) || !std::isfinite(p->max_value())) {
      throw ConfigError("profiles must be finite on [0,1]");
    }
  }
}

double ProblemSpec::rho_at(double x) const {
  const double s = sigma(x);
  return 2.0 * f(x) / (s * s);
}

GridLayout ProblemSpec::layout() const { return GridLayout::unit(grid_n, {ell, i0}); }

GridLayout ProblemSpec::layout_with(std::vector<double> extra) const {
  extra.push_back(ell);
  extra.push_back(i0);
  return GridLayout::unit(grid_n, std::move(extra));
}

}  // namespace commute
