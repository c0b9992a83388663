// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commute/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

#include "commute/errors.hpp"

namespace commute {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Beyond this many variances the bridge crossing probability is below e^{-40}.
constexpr double kBridgeCut = 20.0;
// Steps starting this many standard deviations from a density jump use the
// scale-coordinate update.
constexpr double kBand = 4.0;

std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double sigma_max_of(const Profile& sigma) { return sigma.max_value(); }

}  // namespace

Policy Policy::static_scale(ScaleFunction s) {
  Policy p;
  p.kind = PolicyKind::static_scale;
  p.scale = std::make_shared<const ScaleFunction>(std::move(s));
  return p;
}

Policy Policy::reset_sstar(ScaleFunction s) {
  Policy p;
  p.kind = PolicyKind::reset_sstar;
  p.scale = std::make_shared<const ScaleFunction>(std::move(s));
  return p;
}

Policy Policy::dynamic_optimal(const OptimalScaleResult& opt) {
  Policy p;
  p.kind = PolicyKind::dynamic_optimal;
  p.scale = std::make_shared<const ScaleFunction>(opt.scale);
  p.feedback_level = opt.level;
  p.feedback_density = opt.s_hat_prime;
  return p;
}

Policy Policy::steep(int n, ScaleFunction base) {
  if (n <= 0) throw ConfigError("steep policy needs n >= 1");
  Policy p;
  p.kind = PolicyKind::steep;
  p.steep_n = n;
  p.scale = std::make_shared<const ScaleFunction>(std::move(base));
  return p;
}

std::string Policy::name() const {
  switch (kind) {
    case PolicyKind::static_scale: return "static";
    case PolicyKind::reset_sstar: return "reset-sstar";
    case PolicyKind::dynamic_optimal: return "dynamic-optimal";
    case PolicyKind::steep: return "steep(" + std::to_string(steep_n) + ")";
  }
  return "unknown";
}

PathModel::ScaleTable PathModel::build_table(const ScaleFunction& scale) {
  const auto& density = scale.density();
  ScaleTable t;
  t.breaks = density.breakpoints();
  for (std::size_t k = 0; k < density.piece_count(); ++k) {
    const auto& p = density.piece(k);
    std::vector<double> logs(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) logs[j] = std::log(p[j]);
    t.dlog.push_back(node_derivative(logs, p.step()));
    t.flat.push_back(std::all_of(logs.begin(), logs.end(),
                                 [&](double v) { return v == logs.front(); }));
    const auto sv = scale.integral().node_values(k);
    t.s.emplace_back(sv.begin(), sv.end());
    t.ds.emplace_back(p.values().begin(), p.values().end());
    t.lo.push_back(p.lo());
    t.step.push_back(p.step());
    t.inv_step.push_back(1.0 / p.step());
  }
  for (std::size_t k = 0; k + 1 < density.piece_count(); ++k) {
    const auto& p = density.piece(k);
    const double left = p[p.size() - 1];
    const double right = density.piece(k + 1)[0];
    if (std::abs(left / right - 1.0) > 1e-9) {
      t.skew_level.push_back(p.hi());
      t.skew_left.push_back(left);
      t.skew_right.push_back(right);
      t.skew_piece.push_back(k);
    }
  }
  return t;
}

double PathModel::local_s(const ScaleTable& t, std::size_t k, double x, double* ds) {
  const auto& s = t.s[k];
  const auto& d = t.ds[k];
  const double h = t.step[k];
  const double u = std::clamp((x - t.lo[k]) / h, 0.0, static_cast<double>(s.size() - 1));
  const auto j = std::min(static_cast<std::size_t>(u), s.size() - 2);
  const double q = u - static_cast<double>(j);
  const double q2 = q * q;
  const double q3 = q2 * q;
  if (ds) {
    *ds = (6.0 * (q - q2) * (s[j + 1] - s[j])) / h + (1.0 - 4.0 * q + 3.0 * q2) * d[j] +
          (3.0 * q2 - 2.0 * q) * d[j + 1];
  }
  return (2.0 * q3 - 3.0 * q2 + 1.0) * s[j] + (q3 - 2.0 * q2 + q) * h * d[j] +
         (3.0 * q2 - 2.0 * q3) * s[j + 1] + (q3 - q2) * h * d[j + 1];
}

double PathModel::local_s_inv(const ScaleTable& t, std::size_t k, double y, double guess) {
  const auto& s = t.s[k];
  const double h = t.step[k];
  const std::size_t last = s.size() - 2;
  auto j = std::min(static_cast<std::size_t>(
                        std::clamp((guess - t.lo[k]) / h, 0.0, static_cast<double>(last))),
                    last);
  while (j > 0 && y < s[j]) --j;
  while (j < last && y > s[j + 1]) ++j;
  double lo = t.lo[k] + h * static_cast<double>(j);
  double hi = lo + h;
  double x = lo + h * std::clamp((y - s[j]) / (s[j + 1] - s[j]), 0.0, 1.0);
  for (int it = 0; it < 8; ++it) {
    double ds = 0.0;
    const double r = local_s(t, k, x, &ds) - y;
    if (r > 0.0) hi = x; else lo = x;
    const double xn = x - r / ds;
    const double next = (xn > lo && xn < hi) ? xn : 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15) return next;
    x = next;
  }
  return x;
}

double PathModel::dlog(const ScaleTable& t, double x) const {
  std::size_t k = 0;
  const std::size_t last = t.dlog.size() - 1;
  while (k < last && x >= t.breaks[k + 1]) ++k;
  if (t.flat[k]) return 0.0;
  const auto& d = t.dlog[k];
  double u = (x - t.lo[k]) * t.inv_step[k];
  u = std::clamp(u, 0.0, static_cast<double>(d.size() - 1));
  auto j = static_cast<std::size_t>(u);
  if (j + 1 >= d.size()) j = d.size() - 2;
  const double th = u - static_cast<double>(j);
  return d[j] + th * (d[j + 1] - d[j]);
}

double PathModel::steep_dt_bound(const ProblemSpec& spec, int n) {
  const double smax = sigma_max_of(spec.sigma);
  return 1.0 / (static_cast<double>(n) * n * smax * smax);
}

PathModel::PathModel(const ProblemSpec& spec, Policy policy, SimOptions options)
    : spec_(spec), policy_(std::move(policy)), options_(options) {
  spec_.validate();
  if (!policy_.scale) throw ConfigError("policy has no scale");
  if (!(options_.dt > 0.0)) throw ConfigError("dt must be positive");
  table_ = build_table(*policy_.scale);
  sigma_max_ = sigma_max_of(spec_.sigma);
  if (policy_.kind == PolicyKind::steep) {
    const double bound = steep_dt_bound(spec_, policy_.steep_n);
    if (options_.dt > bound) {
      throw ConfigError("dt = " + number(options_.dt) + " exceeds the stability bound " +
                        number(bound) + " for steep(" + std::to_string(policy_.steep_n) +
                        "): need dt <= 1 / (n^2 sigma_max^2)");
    }
  }
  if (policy_.kind == PolicyKind::dynamic_optimal) {
    const auto& lv = policy_.feedback_level;
    if (lv.size() < 2) throw ConfigError("dynamic policy needs a feedback table");
    cell_lo_ = lv.front();
    cell_h_ = (lv.back() - lv.front()) / static_cast<double>(lv.size() - 1);
    n_cells_ = lv.size() - 1;
    cell_hi_ = lv.back();
    cell_value_.resize(n_cells_);
    for (std::size_t c = 0; c < n_cells_; ++c) {
      cell_value_[c] = std::sqrt(policy_.feedback_density[c] * policy_.feedback_density[c + 1]);
    }
  }
}

PathResult PathModel::run(double x0, std::mt19937_64& rng,
                          const std::vector<std::uint64_t>* checkpoint_steps,
                          std::vector<PathSnapshot>* snapshots) const {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw ConfigError("x0 must lie in [0,1]");
  enum class Mode { pre, post, after_reset, done };
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto u01 = [&]() { return 1.0 - unif(rng); };  // in (0, 1]

  const double ell = spec_.ell;
  const double dt = options_.dt;
  const bool resets = policy_.kind == PolicyKind::reset_sstar ||
                      policy_.kind == PolicyKind::dynamic_optimal;
  const bool steep = policy_.kind == PolicyKind::steep;
  const double steep_n = static_cast<double>(policy_.steep_n);

  PolicyState st;
  st.position = x0;
  st.frontier = std::max(x0, ell);
  PathResult res;
  double inf = x0;      // raw running infimum before T1
  double i_t1 = x0;     // I_{T1}
  Mode mode = Mode::pre;
  if (options_.start_post_t1) {
    mode = Mode::post;
    st.phase = Phase::post_t1;
  }
  std::size_t lowest_cell = n_cells_;  // cells >= lowest_cell are assigned
  if (policy_.kind == PolicyKind::dynamic_optimal) {
    st.assigned_scale.assign(n_cells_, kNaN);
    st.assigned_log.assign(n_cells_, kNaN);
  }
  auto assign_down_to = [&](double level) {
    if (n_cells_ == 0 || level >= cell_lo_ + cell_h_ * static_cast<double>(n_cells_)) return;
    const double u = std::max(0.0, (level - cell_lo_) / cell_h_);
    const auto target = std::min(static_cast<std::size_t>(u), n_cells_ - 1);
    while (lowest_cell > target) {
      --lowest_cell;
      assert(std::isnan(st.assigned_scale[lowest_cell]));
      st.assigned_scale[lowest_cell] = cell_value_[lowest_cell];
      st.assigned_log[lowest_cell] = std::log(cell_value_[lowest_cell]);
      ++res.cells_assigned;
    }
  };
  // Starting after T1 means every level above the frontier is already fixed.
  assign_down_to(mode == Mode::pre ? x0 : cell_lo_);

  double x = x0;
  double t = 0.0;
  double cost = 0.0;
  double fx = spec_.f(x);
  const bool sigma_flat = spec_.sigma.kind() == Profile::Kind::constant;
  const bool f_flat = spec_.f.kind() == Profile::Kind::constant;
  const double sx_flat = spec_.sigma(0.0);
  const double sd_flat = sx_flat * std::sqrt(dt);
  std::size_t next_cp = 0;
  auto snapshot = [&](bool finished) {
    PathSnapshot s;
    s.cost = cost;
    s.x = x;
    s.frontier = mode == Mode::pre ? std::max(inf, ell) : i_t1;
    s.phase = mode == Mode::pre ? Phase::pre_t1 : Phase::post_t1;
    s.reset_done = mode == Mode::after_reset;
    s.finished = finished;
    return s;
  };

  for (std::uint64_t step = 0;; ++step) {
    if (checkpoint_steps) {
      while (next_cp < checkpoint_steps->size() && (*checkpoint_steps)[next_cp] == step) {
        (*snapshots)[next_cp++] = snapshot(false);
      }
      if (options_.stop_after_checkpoints && next_cp == checkpoint_steps->size()) break;
    }
    if (step >= options_.max_steps) {
      throw NumericalError("path did not finish within max_steps");
    }
    const double sx = sigma_flat ? sx_flat : spec_.sigma(x);
    const double sd = sigma_flat ? sd_flat : sx * std::sqrt(dt);
    const double var = sd * sd;

    // Active skew point within reach of this step, if any.
    const double z_reach = kBand * sd;
    std::size_t near = table_.skew_level.size();
    for (std::size_t q = 0; q < table_.skew_level.size(); ++q) {
      const double z = table_.skew_level[q];
      if (mode == Mode::post && steep && i_t1 > ell && z >= ell && z <= i_t1) continue;
      if (mode == Mode::after_reset && z >= ell) continue;
      if (std::abs(x - z) < z_reach) {
        near = q;
        break;
      }
    }

    double xn;
    if (near < table_.skew_level.size()) {
      // Martingale step in scale coordinates: with a = s' sigma held on each
      // side of the jump, Z = (s(X) - s(z)) / a is a unit skew Brownian motion.
      const double z = table_.skew_level[near];
      const std::size_t kl = table_.skew_piece[near];
      const bool left = x < z;
      double sp_x = 0.0;
      const double y = local_s(table_, left ? kl : kl + 1, x, &sp_x);
      const double y_z = table_.s[kl + 1].front();
      const double a_x = sp_x * sx;
      const double ratio = table_.skew_right[near] / table_.skew_left[near];
      const double a_l = left ? a_x : a_x / ratio;
      const double a_r = left ? a_x * ratio : a_x;
      const double z0 = (y - y_z) / a_x;
      double w = z0 + std::sqrt(dt) * normal(rng);
      const double zw = z0 * w;
      if (zw <= 0.0 || (zw < kBridgeCut * dt && u01() < std::exp(-2.0 * zw / dt))) {
        w = u01() <= a_l / (a_l + a_r) ? std::abs(w) : -std::abs(w);
      }
      const bool end_left = w < 0.0;
      const std::size_t ke = end_left ? kl : kl + 1;
      const double y1 = y_z + w * (end_left ? a_l : a_r);
      const double guess = z + w * (end_left ? a_l : a_r) /
                                   (sx * (end_left ? table_.skew_left[near] : table_.skew_right[near]));
      if (y1 >= table_.s[ke].front() && y1 <= table_.s[ke].back()) {
        xn = local_s_inv(table_, ke, y1, guess);
      } else if (y1 < 0.0) {
        // Past an end: mirror, keeping the overshoot visible to the boundary logic.
        xn = -policy_.scale->inverse(-y1, -guess);
      } else if (y1 > policy_.scale->total()) {
        xn = 2.0 - policy_.scale->inverse(2.0 * policy_.scale->total() - y1, 2.0 - guess);
      } else {
        xn = policy_.scale->inverse(y1, guess);
      }
    } else {
      double drift;
      if (mode == Mode::post && steep && i_t1 > ell && x >= ell && x < i_t1) {
        drift = -steep_n * sx * sx;
      } else if (n_cells_ > 1 && x > cell_lo_ && x < cell_hi_) {
        // Frozen one-shot densities, differenced across neighbouring cells.
        const auto c = std::min(static_cast<std::size_t>((x - cell_lo_) / cell_h_), n_cells_ - 1);
        const std::size_t lo = c > lowest_cell ? c - 1 : c;
        const std::size_t hi = c + 1 < n_cells_ ? c + 1 : c;
        if (c < lowest_cell) throw NumericalError("dynamic policy reached an unassigned level");
        drift = -0.5 * sx * sx * (st.assigned_log[hi] - st.assigned_log[lo]) /
                (cell_h_ * static_cast<double>(hi - lo));
      } else {
        drift = -0.5 * sx * sx * dlog(table_, x);
      }
      xn = x + drift * dt + sd * normal(rng);
    }

    bool finish = false;
    double frac = 1.0;
    if (mode == Mode::pre) {
      // Running infimum from the bridge minimum of this step.
      const double lo = std::min(x, xn);
      if (lo - inf < 6.0 * sd || xn < 0.0) {
        const double d = xn - x;
        const double m = 0.5 * (x + xn - std::sqrt(d * d - 2.0 * var * std::log(u01())));
        inf = std::min(inf, std::max(m, 0.0));
      }
      if (xn < 0.0) xn = -xn;
      if (xn > 1.0 + 1e-300 || (1.0 - x) * (1.0 - xn) < kBridgeCut * var) {
        const bool hit = xn >= 1.0 || u01() < std::exp(-2.0 * (1.0 - x) * (1.0 - xn) / var);
        if (hit) {
          if (xn > 1.0) xn = 2.0 - xn;
          res.hit_one_time = t + dt;
          res.min_before_t1 = inf;
          i_t1 = inf;
          mode = Mode::post;
          st.phase = Phase::post_t1;
          if (options_.stop_at_t1) finish = true;
        }
      }
      if (mode == Mode::pre && policy_.kind == PolicyKind::dynamic_optimal) {
        assign_down_to(std::max(inf, ell));
        st.frontier = std::max(inf, ell);
      }
    } else if (mode == Mode::post) {
      if (xn > 1.0) xn = 2.0 - xn;
      const bool reset_level = resets && i_t1 > ell;
      const double d = reset_level ? i_t1 : 0.0;
      const double a = x - d;
      const double b = xn - d;
      if (b <= 0.0 || (a * b < kBridgeCut * var && u01() < std::exp(-2.0 * a * b / var))) {
        if (b < 0.0) frac = a / (a - b);
        if (reset_level && ell > 0.0) {
          // Instantaneous translation to ell, reflecting barrier there from now on.
          t += frac * dt;
          cost += 0.5 * frac * dt * (fx + spec_.f(d));
          x = ell;
          fx = spec_.f(x);
          mode = Mode::after_reset;
          st.reset_done = true;
          continue;
        }
        finish = true;
        xn = d;
      }
    } else {  // after_reset
      if (xn > ell) xn = 2.0 * ell - xn;
      const double a = x;
      const double b = xn;
      if (b <= 0.0 || (a * b < kBridgeCut * var && u01() < std::exp(-2.0 * a * b / var))) {
        if (b < 0.0) frac = a / (a - b);
        finish = true;
        xn = 0.0;
      }
    }
    const double fn = f_flat ? fx : spec_.f(xn);
    cost += 0.5 * frac * dt * (fx + fn);
    t += frac * dt;
    x = xn;
    fx = fn;
    ++res.steps;
    if (finish) break;
  }
  if (mode == Mode::pre) res.min_before_t1 = inf;
  res.commute_time = t;
  res.accumulated_cost = cost;
  if (checkpoint_steps) {
    while (next_cp < checkpoint_steps->size()) (*snapshots)[next_cp++] = snapshot(true);
  }
  return res;
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

PathResult simulate_path(const ProblemSpec& spec, const Policy& policy, double x0,
                         const SimOptions& options, std::mt19937_64& rng) {
  return PathModel(spec, policy, options).run(x0, rng);
}

std::vector<PathResult> simulate_paths_serial(const PathModel& model, double x0,
                                              std::size_t n_paths, std::uint64_t seed) {
  std::vector<PathResult> out(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    auto rng = path_rng(seed, p);
    out[p] = model.run(x0, rng);
  }
  return out;
}

std::vector<PathResult> simulate_paths_parallel(const PathModel& model, double x0,
                                                std::size_t n_paths, std::uint64_t seed) {
  std::vector<PathResult> out(n_paths);
  const auto n = static_cast<std::int64_t>(n_paths);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t p = 0; p < n; ++p) {
    try {
      auto rng = path_rng(seed, static_cast<std::uint64_t>(p));
      out[static_cast<std::size_t>(p)] = model.run(x0, rng);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

MCEstimate summarize_cost(const std::vector<PathResult>& paths, std::uint64_t seed, double dt) {
  MCEstimate e;
  e.n_paths = paths.size();
  e.seed = seed;
  e.dt = dt;
  if (paths.empty()) return e;
  double mean = 0.0;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    mean += (paths[p].accumulated_cost - mean) / static_cast<double>(p + 1);
  }
  double ss = 0.0;
  for (const auto& r : paths) ss += (r.accumulated_cost - mean) * (r.accumulated_cost - mean);
  e.mean = mean;
  if (paths.size() > 1) {
    const double sd = std::sqrt(ss / static_cast<double>(paths.size() - 1));
    e.stderr_ = sd / std::sqrt(static_cast<double>(paths.size()));
  }
  return e;
}

MCEstimate mc_expected_cost(const ProblemSpec& spec, const Policy& policy, double x0,
                            std::size_t n_paths, double dt, std::uint64_t seed) {
  if (n_paths < 2) throw ConfigError("n_paths must be at least 2");
  SimOptions opt;
  opt.dt = dt;
  const PathModel model(spec, policy, opt);
  return summarize_cost(simulate_paths_parallel(model, x0, n_paths, seed), seed, dt);
}

MCEstimate mc_expected_cost_serial(const ProblemSpec& spec, const Policy& policy, double x0,
                                   std::size_t n_paths, double dt, std::uint64_t seed) {
  if (n_paths < 2) throw ConfigError("n_paths must be at least 2");
  SimOptions opt;
  opt.dt = dt;
  const PathModel model(spec, policy, opt);
  return summarize_cost(simulate_paths_serial(model, x0, n_paths, seed), seed, dt);
}

PairedDifference paired_difference(const std::vector<PathResult>& a,
                                   const std::vector<PathResult>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DomainError("paired samples must match");
  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    mean += (a[p].accumulated_cost - b[p].accumulated_cost - mean) / static_cast<double>(p + 1);
  }
  double ss = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double d = a[p].accumulated_cost - b[p].accumulated_cost - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n))};
}

SubmartingaleReport verify_submartingale(const ProblemSpec& spec, const Policy& policy,
                                         double x0, std::size_t n_paths,
                                         const std::vector<double>& checkpoint_times,
                                         double dt, std::uint64_t seed) {
  if (n_paths < 2) throw ConfigError("n_paths must be at least 2");
  SubmartingaleReport rep;
  rep.checkpoints = checkpoint_times;
  if (!std::is_sorted(checkpoint_times.begin(), checkpoint_times.end())) {
    throw ConfigError("checkpoint times must be nondecreasing");
  }
  std::vector<std::uint64_t> steps;
  for (double tc : checkpoint_times) {
    if (tc < 0.0) throw ConfigError("checkpoint times must be nonnegative");
    steps.push_back(static_cast<std::uint64_t>(std::llround(tc / dt)));
  }
  SimOptions opt;
  opt.dt = dt;
  opt.stop_after_checkpoints = true;
  const PathModel model(spec, policy, opt);
  const DiffusionMeasures m(*policy.scale, spec);
  const ValueSurface surface(m, spec.ell, spec.i0);
  const std::size_t nc = steps.size();

  std::vector<double> values(n_paths * nc);
  const auto n = static_cast<std::int64_t>(n_paths);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t p = 0; p < n; ++p) {
    try {
      auto rng = path_rng(seed, static_cast<std::uint64_t>(p));
      std::vector<PathSnapshot> snaps(nc);
      model.run(x0, rng, &steps, &snaps);
      for (std::size_t c = 0; c < nc; ++c) {
        const auto& s = snaps[c];
        double v = 0.0;
        if (!s.finished) {
          if (s.reset_done) v = surface.after_reset(s.x);
          else if (s.phase == Phase::pre_t1) v = surface.pre(s.frontier, s.x);
          else v = surface.post(s.frontier, s.x);
        }
        values[static_cast<std::size_t>(p) * nc + c] = s.cost + v;
      }
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  rep.mean_value.assign(nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    double sum = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) sum += values[p * nc + c];
    rep.mean_value[c] = sum / static_cast<double>(n_paths);
  }
  for (std::size_t c = 0; c + 1 < nc; ++c) {
    double mean = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      mean += values[p * nc + c + 1] - values[p * nc + c];
    }
    mean /= static_cast<double>(n_paths);
    double ss = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double d = values[p * nc + c + 1] - values[p * nc + c] - mean;
      ss += d * d;
    }
    Increment inc{checkpoint_times[c], checkpoint_times[c + 1], mean,
                  std::sqrt(ss / static_cast<double>(n_paths - 1)) /
                      std::sqrt(static_cast<double>(n_paths))};
    if (inc.mean < -3.0 * inc.stderr_) rep.all_nonnegative = false;
    if (std::abs(inc.mean) > 3.0 * inc.stderr_) rep.all_within_zero = false;
    if (inc.mean > 3.0 * inc.stderr_) rep.any_positive = true;
    rep.increments.push_back(inc);
  }
  return rep;
}

}  // namespace commute
