// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "commute/measures.hpp"
#include "commute/optimizer.hpp"
#include "commute/problem.hpp"

namespace commute {

enum class PolicyKind { static_scale, reset_sstar, dynamic_optimal, steep };

/// A control policy; every kind carries the scale it follows before T1.
struct Policy {
  PolicyKind kind = PolicyKind::static_scale;
  std::shared_ptr<const ScaleFunction> scale;
  int steep_n = 0;
  // dynamic_optimal: the feedback density per node of [ell, i0].
  std::vector<double> feedback_level;
  std::vector<double> feedback_density;

  static Policy static_scale(ScaleFunction s);
  static Policy reset_sstar(ScaleFunction s);
  static Policy dynamic_optimal(const OptimalScaleResult& opt);
  static Policy steep(int n, ScaleFunction base);

  std::string name() const;
};

/// Per-path controller state.
struct PolicyState {
  double frontier = 1.0;  // running infimum before T1, floored at ell
  Phase phase = Phase::pre_t1;
  bool reset_done = false;
  double position = 0.0;
  double clock = 0.0;
  // One entry per grid cell of (ell, i0); NaN until first assigned.
  std::vector<double> assigned_scale;
  std::vector<double> assigned_log;
};

struct PathResult {
  double commute_time = 0.0;
  double accumulated_cost = 0.0;
  double min_before_t1 = 0.0;
  double hit_one_time = 0.0;
  std::uint64_t steps = 0;
  std::size_t cells_assigned = 0;
};

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
};

struct SimOptions {
  double dt = 1e-4;
  bool stop_at_t1 = false;      // end the path at the first hit of 1
  bool start_post_t1 = false;   // start with the phase flag already set (I_{T1} = x0)
  std::uint64_t max_steps = 2'000'000'000ULL;
  bool stop_after_checkpoints = false;  // end the path once the last snapshot is taken
};

/// Snapshot of a path at a checkpoint time.
struct PathSnapshot {
  double cost = 0.0;
  double x = 0.0;
  double frontier = 0.0;
  Phase phase = Phase::pre_t1;
  bool reset_done = false;
  bool finished = false;
};

/// Precomputed drift tables and event levels for one (spec, policy, dt).
class PathModel {
 public:
  PathModel(const ProblemSpec& spec, Policy policy, SimOptions options);

  /// Throws ConfigError when dt violates the steep-drift bound.
  static double steep_dt_bound(const ProblemSpec& spec, int n);

  PathResult run(double x0, std::mt19937_64& rng,
                 const std::vector<std::uint64_t>* checkpoint_steps = nullptr,
                 std::vector<PathSnapshot>* snapshots = nullptr) const;

  const Policy& policy() const { return policy_; }
  const SimOptions& options() const { return options_; }
  const ProblemSpec& spec() const { return spec_; }

 private:
  struct ScaleTable {
    std::vector<double> breaks;                // piece boundaries
    std::vector<std::vector<double>> dlog;     // (ln s')' at nodes, per piece
    std::vector<std::vector<double>> s, ds;    // s and s' at nodes, per piece
    std::vector<double> lo, step, inv_step;
    std::vector<char> flat;                    // (ln s')' vanishes on the piece
    // Interior jumps of s': level, piece to its left, one-sided densities.
    std::vector<double> skew_level, skew_left, skew_right;
    std::vector<std::size_t> skew_piece;
  };
  static ScaleTable build_table(const ScaleFunction& scale);
  // Cubic Hermite s on piece k and its inverse; both return s' through `ds`.
  static double local_s(const ScaleTable& t, std::size_t k, double x, double* ds);
  static double local_s_inv(const ScaleTable& t, std::size_t k, double y, double guess);
  double dlog(const ScaleTable& t, double x) const;

  ProblemSpec spec_;
  Policy policy_;
  SimOptions options_;
  ScaleTable table_;
  double sigma_max_ = 1.0;
  // Geometry of the one-shot cells for dynamic_optimal.
  double cell_lo_ = 0.0;
  double cell_h_ = 1.0;
  double cell_hi_ = 0.0;
  std::size_t n_cells_ = 0;
  std::vector<double> cell_value_;
};

/// Deterministic per-path generator derived from (seed, path index).
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path);

PathResult simulate_path(const ProblemSpec& spec, const Policy& policy, double x0,
                         const SimOptions& options, std::mt19937_64& rng);

/// All per-path results, path p on path_rng(seed, p).
std::vector<PathResult> simulate_paths_serial(const PathModel& model, double x0,
                                              std::size_t n_paths, std::uint64_t seed);
std::vector<PathResult> simulate_paths_parallel(const PathModel& model, double x0,
                                                std::size_t n_paths, std::uint64_t seed);

MCEstimate summarize_cost(const std::vector<PathResult>& paths, std::uint64_t seed, double dt);

MCEstimate mc_expected_cost(const ProblemSpec& spec, const Policy& policy, double x0,
                            std::size_t n_paths, double dt, std::uint64_t seed);
MCEstimate mc_expected_cost_serial(const ProblemSpec& spec, const Policy& policy, double x0,
                                   std::size_t n_paths, double dt, std::uint64_t seed);

/// Mean and standard error of the pathwise difference a - b (common random numbers).
struct PairedDifference {
  double mean = 0.0;
  double stderr_ = 0.0;
};
PairedDifference paired_difference(const std::vector<PathResult>& a,
                                   const std::vector<PathResult>& b);

struct Increment {
  double t1 = 0.0;
  double t2 = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct SubmartingaleReport {
  std::vector<double> checkpoints;
  std::vector<double> mean_value;  // E[S_t] per checkpoint
  std::vector<Increment> increments;
  bool all_nonnegative = true;      // every increment >= -3 stderr
  bool all_within_zero = true;      // every increment within +-3 stderr of 0
  bool any_positive = false;        // some increment > +3 stderr
};

/// Estimates E[S_{t2} - S_{t1}] for S_t = cost up to t plus the optimal value
/// at the current state, under `policy`. The value surface uses the policy's
/// own scale as the already-fixed part above the frontier.
SubmartingaleReport verify_submartingale(const ProblemSpec& spec, const Policy& policy,
                                         double x0, std::size_t n_paths,
                                         const std::vector<double>& checkpoint_times,
                                         double dt, std::uint64_t seed);

}  // namespace commute
