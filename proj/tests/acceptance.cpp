// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance battery. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "commute/kernel.hpp"
#include "commute/measures.hpp"
#include "commute/optimizer.hpp"
#include "commute/payoff.hpp"
#include "commute/simulator.hpp"
#include "commute/special.hpp"
#include "oracles.hpp"

using namespace commute;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("AC%d %s: %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ProblemSpec reference() {
  ProblemSpec sp;
  sp.ell = 0.25;
  sp.i0 = 0.75;
  sp.grid_n = 2049;
  return sp;
}

// Random smooth coefficients, a random tabulated initial scale, random levels.
ProblemSpec random_spec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProblemSpec sp;
  sp.ell = 0.05 + 0.35 * u(rng);
  sp.i0 = sp.ell + 0.15 + (0.9 - sp.ell - 0.15) * u(rng);
  sp.grid_n = n;
  sp.sigma = Profile::exponential(0.6 + 0.8 * u(rng), u(rng) - 0.5);
  sp.f = Profile::affine(0.5 + u(rng), 1.5 * u(rng) - 0.4);
  std::vector<double> tab(40);
  for (double& v : tab) v = std::exp(1.5 * (u(rng) - 0.5));
  sp.s0_prime = Profile::tabulated(tab);
  return sp;
}

// ---------------------------------------------------------------------------

void ac1() {
  const auto sp = reference();
  const auto t0 = Clock::now();
  const auto e = mc_expected_cost(sp, Policy::static_scale(ScaleFunction::initial(sp)), 0.0,
                                  100000, 1e-4, 20240101);
  const double el = seconds_since(t0);
  const double z = (e.mean - 2.0) / e.stderr_;
  const bool ok = std::abs(z) <= 3.0 && el < 120.0;
  report(1, ok, "mean " + fmt("%.5f", e.mean) + " stderr " + fmt("%.5f", e.stderr_) + " z " +
                    fmt("%.2f", z) + " runtime " + fmt("%.1f", el) + " s (limit 120 s)");
}

void ac2() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int rep = 0; rep < 50; ++rep) {
    const auto sp = random_spec(rng, 4097);
    const DiffusionMeasures m(ScaleFunction::initial(sp), sp);
    const double i = sp.ell + (sp.i0 - sp.ell) * (0.05 + 0.95 * u(rng));
    worst = std::max(worst, payoff_sstar(m, sp.ell, i, PayoffMode::verify).gap);
  }
  const double el = seconds_since(t0);
  report(2, worst <= 1e-6 && el < 10.0,
         "max |closed - expansion| " + fmt("%.3e", worst) + " over 50 instances (limit 1e-6), " +
             fmt("%.2f", el) + " s (limit 10 s)");
}

void ac3() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto sp = random_spec(rng, 2049);
    const DiffusionMeasures m(ScaleFunction::initial(sp), sp);
    const double i = sp.ell + (sp.i0 - sp.ell) * (0.05 + 0.95 * u(rng));
    const double a = value_V(m, sp.ell, i).value;
    const double b = value_by_t_search(m, sp.ell, i).value;
    worst = std::max(worst, std::abs(a - b));
  }
  report(3, worst <= 1e-6, "max |conjugate - t search| " + fmt("%.3e", worst) + " over 20 instances (limit 1e-6)");
}

void ac4() {
  double worst_conv = 0.0;
  double worst_rel = 0.0;
  bool positive = true;
  bool decreasing = true;
  for (double d : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double lo = gamma_delta(d) + 0.01;
    const int n = 200;
    std::vector<double> zs(n + 1);
    std::vector<double> ps(n + 1);
    for (int j = 0; j <= n; ++j) {
      zs[j] = lo + (12.0 - lo) * j / n;
      ps[j] = psi(d, zs[j]).psi;
      positive = positive && ps[j] > 0.0;
      if (j > 0) decreasing = decreasing && ps[j] < ps[j - 1];
    }
    for (int j = 1; j < n; ++j) worst_conv = std::min(worst_conv, ps[j + 1] - 2.0 * ps[j] + ps[j - 1]);
    for (int j = 0; j <= n; ++j) {
      const double z = zs[j];
      // Richardson-extrapolated central difference: the plain one loses
      // accuracy as z nears the pole at gamma_delta.
      const double h = 1e-5 * std::max(1.0, z);
      auto central = [&](double step) { return (psi(d, z + step).psi - psi(d, z - step).psi) / (2.0 * step); };
      const double fd = (4.0 * central(0.5 * h) - central(h)) / 3.0;
      const double cf = psi(d, z).psi_prime;
      worst_rel = std::max(worst_rel, std::abs(cf - fd) / std::abs(fd));
    }
  }
  const bool ok = positive && decreasing && worst_conv >= -1e-8 && worst_rel <= 1e-6;
  report(4, ok, std::string("positive ") + (positive ? "yes" : "no") + ", decreasing " +
                    (decreasing ? "yes" : "no") + ", min second difference " + fmt("%.3e", worst_conv) +
                    " (limit -1e-8), max rel |Psi' - FD| " + fmt("%.3e", worst_rel) + " (limit 1e-6)");
}

void ac5() {
  // rho = 2(1 + x): beta has a closed form.
  const double ell = 0.25;
  const double i = 0.75;
  auto rho = [](double y) { return 2.0 * (1.0 + y); };
  auto beta_exact = [&](double y) {
    return 2.0 * std::sqrt(2.0) / 3.0 * (std::pow(1.0 + y, 1.5) - std::pow(1.0 + ell, 1.5));
  };
  const std::size_t n = 8193;
  const auto beta = GridFunction::sample(ell, i, n, beta_exact);
  const double h_ell = 1.3;
  const double h_i = 2.4;
  const auto el = euler_lagrange_H(beta, h_ell, h_i);
  const double h = beta.step();
  double worst = 0.0;
  for (std::size_t j = 2; j + 2 < n; ++j) {
    const double dH = (el.H[j - 2] - 8 * el.H[j - 1] + 8 * el.H[j + 1] - el.H[j + 2]) / (12 * h);
    const double Hj = el.H[j];
    const double y = beta.node(j);
    worst = std::max(worst, std::abs(dH / (Hj * std::exp(Hj)) - el.D * std::sqrt(rho(y))));
  }
  // J[H] = int rho H e^H / H' under perturbations vanishing at both ends.
  const double phi0 = phi_exp_integral(h_ell);
  auto H = [&](double y) { return phi_exp_integral_inv(phi0 - el.D * beta_exact(y)); };
  auto Hp = [&](double y) {
    const double v = H(y);
    return el.D * std::sqrt(rho(y)) * v * std::exp(v);
  };
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  const double w = M_PI / (i - ell);
  auto J = [&](const std::vector<double>& a, double eps) {
    return oracle::simpson(
        [&](double y) {
          double eta = 0.0;
          double deta = 0.0;
          for (std::size_t q = 0; q < a.size(); ++q) {
            const double k = static_cast<double>(q + 1);
            eta += a[q] * std::sin(k * w * (y - ell));
            deta += a[q] * k * w * std::cos(k * w * (y - ell));
          }
          const double hv = H(y) + eps * eta;
          return rho(y) * hv * std::exp(hv) / (Hp(y) + eps * deta);
        },
        ell, i, 4000);
  };
  const double j0 = J({}, 0.0);
  double worst_drop = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(4);
    for (double& v : a) v = g(rng);
    worst_drop = std::max(worst_drop, j0 - J(a, 1e-3));
  }
  report(5, worst <= 1e-8 && worst_drop <= 1e-8,
         "max ODE residual " + fmt("%.3e", worst) + " (limit 1e-8), max J decrease " +
             fmt("%.3e", worst_drop) + " over 20 perturbations (limit 1e-8)");
}

void ac6() {
  const auto sp = reference();
  const auto opt = optimal_scale(sp);
  const std::size_t n = opt.level.size();
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) worst = std::max(worst, std::abs(opt.residual[j]));
  int majority = 0;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::string fracs;
  for (int rep = 0; rep < 10; ++rep) {
    const double freq = 1.0 + std::floor(12.0 * u(rng));
    const double phase = 2.0 * M_PI * u(rng);
    const auto pert = opt.scale.density().map_nodes(
        [&](double x, std::size_t k, std::size_t j) {
          const double v = opt.scale.density().piece(k)[j];
          if (x <= sp.ell || x >= sp.i0) return v;
          return v * (1.0 + 0.1 * std::sin(freq * M_PI * (x - sp.ell) / (sp.i0 - sp.ell) + phase));
        },
        Interp::log_linear);
    const DiffusionMeasures mp(ScaleFunction(pert), sp);
    int neg = 0;
    int total = 0;
    for (std::size_t j = 1; j + 1 < n; j += 4) {
      ++total;
      if (delta_residual(mp, sp.ell, opt.level[j]) < -1e-8) ++neg;
    }
    if (2 * neg > total) ++majority;
    fracs += (rep ? "," : "") + fmt("%.2f", static_cast<double>(neg) / total);
  }
  report(6, worst <= 1e-6 && majority == 10,
         "max |Delta| along optimum " + fmt("%.3e", worst) + " (limit 1e-6); perturbed scales with Delta < -1e-8 at a majority of nodes: " +
             std::to_string(majority) + "/10 (fractions " + fracs + ")");
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& F) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  std::size_t j = 0;
  while (j < sample.size()) {
    std::size_t k = j;
    while (k < sample.size() && sample[k] == sample[j]) ++k;
    const double v = sample[j];
    const double f_at = F(v);
    const double f_before = v > 0.0 ? f_at : 0.0;
    d = std::max({d, std::abs(static_cast<double>(k) / n - f_at), std::abs(static_cast<double>(j) / n - f_before)});
    j = k;
  }
  return d;
}

void ac7() {
  const std::size_t n = 100000;
  const double eps = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(n)));
  std::string detail;
  bool ok = true;
  for (int which = 0; which < 2; ++which) {
    auto sp = reference();
    if (which == 1) sp.s0_prime = Profile::exponential(1.0, -2.0);
    const auto s = ScaleFunction::initial(sp);
    SimOptions o;
    o.dt = 1e-4;
    o.stop_at_t1 = true;
    const PathModel model(sp, Policy::static_scale(s), o);
    const auto paths = simulate_paths_parallel(model, 0.75, n, 700 + which);
    std::vector<double> mins;
    mins.reserve(n);
    for (const auto& r : paths) mins.push_back(r.min_before_t1);
    // Closed-form tail scale as the reference law.
    auto tail = [which](double x) {
      return which == 0 ? 1.0 - x : 0.5 * (std::exp(-2.0 * x) - std::exp(-2.0));
    };
    const double d = ks_distance(mins, [&](double x) { return x >= 0.75 ? 1.0 : tail(0.75) / tail(x); });
    ok = ok && d <= eps;
    detail += std::string(which ? "; exp(-2x): " : "natural: ") + "sup |F_n - F| " + fmt("%.5f", d);
  }
  report(7, ok, detail + " (DKW 99% band " + fmt("%.5f", eps) + ")");
}

void ac8() {
  const std::size_t n = 10000;
  const double dt = 1e-4;
  std::vector<ProblemSpec> inst;
  inst.push_back(reference());
  {
    ProblemSpec sp;
    sp.ell = 0.2;
    sp.i0 = 0.7;
    sp.grid_n = 2049;
    sp.sigma = Profile::constant(1.2);
    sp.f = Profile::affine(1.0, 1.0);
    inst.push_back(sp);
  }
  {
    ProblemSpec sp;
    sp.ell = 0.3;
    sp.i0 = 0.8;
    sp.grid_n = 2049;
    sp.sigma = Profile::constant(0.8);
    sp.f = Profile::exponential(1.0, -0.5);
    sp.s0_prime = Profile::exponential(1.0, 1.0);
    inst.push_back(sp);
  }
  bool ok = true;
  std::string detail;
  for (std::size_t q = 0; q < inst.size(); ++q) {
    const auto& sp = inst[q];
    const auto opt = optimal_scale(sp);
    const auto s0 = ScaleFunction::initial(sp);
    SimOptions o;
    o.dt = dt;
    const std::uint64_t seed = 800 + q;
    auto run = [&](Policy p) { return simulate_paths_parallel(PathModel(sp, std::move(p), o), sp.i0, n, seed); };
    const auto dyn = run(Policy::dynamic_optimal(opt));
    const auto sta = run(Policy::static_scale(s0));
    const auto st4 = run(Policy::steep(4, opt.scale));
    const auto st16 = run(Policy::steep(16, opt.scale));
    const auto st64 = run(Policy::steep(64, opt.scale));
    const auto rst = run(Policy::reset_sstar(opt.scale));
    auto le = [](const std::vector<PathResult>& a, const std::vector<PathResult>& b) {
      const auto d = paired_difference(a, b);  // a - b
      return d.mean <= 3.0 * d.stderr_;
    };
    const bool dominate = le(dyn, sta) && le(dyn, st4) && le(dyn, st16);
    const bool monotone = le(st16, st4) && le(st64, st16) && le(rst, st64);
    ok = ok && dominate && monotone;
    const double V = opt.value_at.back();
    detail += (q ? "; " : "") + std::string("instance ") + std::to_string(q + 1) + " V " + fmt("%.4f", V) +
              " dynamic " + fmt("%.4f", summarize_cost(dyn, seed, dt).mean) + " static " +
              fmt("%.4f", summarize_cost(sta, seed, dt).mean) + " steep4/16/64 " +
              fmt("%.4f", summarize_cost(st4, seed, dt).mean) + "/" +
              fmt("%.4f", summarize_cost(st16, seed, dt).mean) + "/" +
              fmt("%.4f", summarize_cost(st64, seed, dt).mean) + " reset " +
              fmt("%.4f", summarize_cost(rst, seed, dt).mean) + (dominate ? "" : " [domination failed]") +
              (monotone ? "" : " [monotonicity failed]");
  }
  report(8, ok, detail);
}

void ac9() {
  const auto sp = reference();
  const auto opt = optimal_scale(sp);
  const std::vector<double> cps{0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
  const auto good = verify_submartingale(sp, Policy::dynamic_optimal(opt), sp.i0, 20000, cps, 1e-4, 901);
  const auto bad = verify_submartingale(sp, Policy::static_scale(ScaleFunction::initial(sp)), sp.i0, 20000,
                                        cps, 1e-4, 902);
  auto zs = [](const SubmartingaleReport& r) {
    std::string s;
    for (const auto& inc : r.increments) {
      s += (s.empty() ? "" : ",") + fmt("%.2f", inc.stderr_ > 0.0 ? inc.mean / inc.stderr_ : 0.0);
    }
    return s;
  };
  report(9, good.all_within_zero && bad.any_positive,
         "optimal policy increment z-scores [" + zs(good) + "] (all within 3: " +
             (good.all_within_zero ? "yes" : "no") + "); static natural policy z-scores [" + zs(bad) +
             "] (some above 3: " + (bad.any_positive ? "yes" : "no") + ")");
}

void ac10() {
  const double e1 = std::abs(phi_exp_integral(1.0) - oracle::e1(1.0));
  const double e2 = std::abs(phi_exp_integral(2.0) - oracle::e1(2.0));
  double worst = 0.0;
  for (double d : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double lo = gamma_delta(d) + 0.01;
    for (int j = 0; j <= 200; ++j) {
      const double z = lo + (12.0 - lo) * j / 200.0;
      const double y = p_delta_inv(d, z);
      worst = std::max(worst, std::abs(p_delta(d, y) - z));
    }
  }
  report(10, e1 <= 1e-9 && e2 <= 1e-9 && worst <= 1e-12,
         "|phi(1) - oracle| " + fmt("%.2e", e1) + ", |phi(2) - oracle| " + fmt("%.2e", e2) +
             " (limit 1e-9); max p round-trip error " + fmt("%.2e", worst) + " (limit 1e-12)");
}

}  // namespace

// With arguments, runs only the listed criteria: `acceptance 4 7`.
int main(int argc, char** argv) {
  const auto t0 = Clock::now();
  void (*const all[])() = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10};
  std::vector<int> which;
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > 10) {
      std::fprintf(stderr, "acceptance: no criterion '%s'\n", argv[a]);
      return 2;
    }
    which.push_back(k);
  }
  if (which.empty()) {
    for (int k = 1; k <= 10; ++k) which.push_back(k);
  }
  for (int k : which) all[k - 1]();
  std::printf("%d of %zu criteria passed in %.1f s\n", static_cast<int>(which.size()) - failures, which.size(),
              seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
