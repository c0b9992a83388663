// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "commute/errors.hpp"
#include "commute/simulator.hpp"

using namespace commute;

namespace {

ProblemSpec reference(double ell = 0.25, double i0 = 0.75) {
  ProblemSpec sp;
  sp.ell = ell;
  sp.i0 = i0;
  sp.grid_n = 1025;
  return sp;
}

bool within(const MCEstimate& e, double want, double k) {
  return std::abs(e.mean - want) <= k * e.stderr_;
}

}  // namespace

TEST_CASE("serial and parallel runs are identical") {
  const auto sp = reference();
  SimOptions opt;
  opt.dt = 1e-3;
  const PathModel model(sp, Policy::reset_sstar(ScaleFunction::initial(sp)), opt);
  const auto a = simulate_paths_serial(model, 0.75, 300, 17);
  const auto b = simulate_paths_parallel(model, 0.75, 300, 17);
  const auto c = simulate_paths_parallel(model, 0.75, 300, 17);
  REQUIRE(a.size() == b.size());
  for (std::size_t p = 0; p < a.size(); ++p) {
    CHECK(a[p].accumulated_cost == b[p].accumulated_cost);
    CHECK(a[p].steps == b[p].steps);
    CHECK(b[p].accumulated_cost == c[p].accumulated_cost);
  }
  const auto d = simulate_paths_serial(model, 0.75, 300, 18);
  int same = 0;
  for (std::size_t p = 0; p < a.size(); ++p) same += a[p].accumulated_cost == d[p].accumulated_cost;
  CHECK(same == 0);
}

TEST_CASE("path streams are distinct") {
  auto r0 = path_rng(1, 0);
  auto r1 = path_rng(1, 1);
  auto r2 = path_rng(2, 0);
  const auto x0 = r0();
  CHECK(x0 != r1());
  CHECK(x0 != r2());
  auto again = path_rng(1, 0);
  CHECK(again() == x0);
}

TEST_CASE("steep policy enforces its step bound") {
  const auto sp = reference();
  const auto s0 = ScaleFunction::initial(sp);
  CHECK(PathModel::steep_dt_bound(sp, 16) == doctest::Approx(1.0 / 256.0));
  SimOptions opt;
  opt.dt = 1e-3;
  CHECK_THROWS_AS(PathModel(sp, Policy::steep(64, s0), opt), ConfigError);
  CHECK_NOTHROW(PathModel(sp, Policy::steep(16, s0), opt));
  CHECK_THROWS_AS(Policy::steep(0, s0), ConfigError);
  opt.dt = 0.0;
  CHECK_THROWS_AS(PathModel(sp, Policy::static_scale(s0), opt), ConfigError);
}

TEST_CASE("input validation") {
  const auto sp = reference();
  const auto s0 = ScaleFunction::initial(sp);
  CHECK_THROWS_AS(mc_expected_cost(sp, Policy::static_scale(s0), 1.5, 10, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(mc_expected_cost(sp, Policy::static_scale(s0), 0.5, 1, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(verify_submartingale(sp, Policy::static_scale(s0), 0.5, 10, {0.2, 0.1}, 1e-3, 1),
                  ConfigError);
}

TEST_CASE("one-shot cells are written once and only below the start") {
  const auto sp = reference();
  const auto opt = optimal_scale(sp);
  const auto pol = Policy::dynamic_optimal(opt);
  const std::size_t cells = opt.level.size() - 1;
  SimOptions o;
  o.dt = 1e-3;
  const PathModel model(sp, pol, o);
  const auto paths = simulate_paths_serial(model, 0.75, 200, 3);
  for (const auto& r : paths) {
    CHECK(r.cells_assigned <= cells);
    const double lowest = std::max(r.min_before_t1, sp.ell);
    // Cells from the top down to the one holding the running infimum.
    const double expected = (sp.i0 - lowest) / (sp.i0 - sp.ell) * static_cast<double>(cells);
    CHECK(std::abs(static_cast<double>(r.cells_assigned) - expected) <= 1.0);
  }
  o.start_post_t1 = true;
  const PathModel post(sp, pol, o);
  auto rng = path_rng(3, 0);
  CHECK(post.run(1.0, rng).cells_assigned == cells);
}

TEST_CASE("small Monte Carlo checks") {
  const auto sp = reference();
  const auto s0 = ScaleFunction::initial(sp);
  const double dt = 1e-3;

  const auto commute = mc_expected_cost(sp, Policy::static_scale(s0), 0.0, 20000, dt, 21);
  CHECK(within(commute, 2.0, 4.0));

  SimOptions opt;
  opt.dt = dt;
  opt.start_post_t1 = true;
  const PathModel post(sp, Policy::static_scale(s0), opt);
  const auto down = summarize_cost(simulate_paths_parallel(post, 1.0, 20000, 22), 22, dt);
  CHECK(within(down, 1.0, 4.0));

  const auto reset = mc_expected_cost(sp, Policy::reset_sstar(s0), 0.75, 20000, dt, 23);
  CHECK(within(reset, 0.9375, 4.0));

  // With ell = 0 and a start at 0 the reset never fires.
  const auto sp0 = reference(0.0, 0.5);
  const auto n0 = ScaleFunction::initial(sp0);
  const auto a = mc_expected_cost(sp0, Policy::static_scale(n0), 0.0, 2000, dt, 24);
  const auto b = mc_expected_cost(sp0, Policy::reset_sstar(n0), 0.0, 2000, dt, 24);
  CHECK(a.mean == b.mean);
}

TEST_CASE("paired differences") {
  const auto sp = reference();
  SimOptions opt;
  opt.dt = 1e-3;
  const PathModel model(sp, Policy::static_scale(ScaleFunction::initial(sp)), opt);
  const auto a = simulate_paths_parallel(model, 0.5, 500, 9);
  const auto d = paired_difference(a, a);
  CHECK(d.mean == 0.0);
  CHECK(d.stderr_ == 0.0);
  const std::vector<PathResult> short_one(a.begin(), a.begin() + 10);
  CHECK_THROWS_AS(paired_difference(a, short_one), DomainError);
}

TEST_CASE("snapshots: paths stay legal and equal checkpoints give zero increments") {
  const auto sp = reference();
  const auto opt = optimal_scale(sp);
  const auto pol = Policy::dynamic_optimal(opt);
  SimOptions o;
  o.dt = 1e-3;
  const PathModel model(sp, pol, o);
  const std::vector<std::uint64_t> steps{0, 10, 50, 200, 800, 3000};
  for (std::uint64_t p = 0; p < 100; ++p) {
    auto rng = path_rng(5, p);
    std::vector<PathSnapshot> snaps(steps.size());
    model.run(0.75, rng, &steps, &snaps);
    for (std::size_t c = 0; c < snaps.size(); ++c) {
      CHECK(snaps[c].x >= 0.0);
      CHECK(snaps[c].x <= 1.0);
      if (c > 0) {
        CHECK(snaps[c].cost >= snaps[c - 1].cost);
        if (snaps[c - 1].phase == Phase::post_t1) CHECK(snaps[c].phase == Phase::post_t1);
        if (snaps[c].phase == Phase::pre_t1) CHECK(snaps[c].frontier <= snaps[c - 1].frontier);
      }
    }
  }
  const auto rep = verify_submartingale(sp, pol, 0.75, 200, {0.1, 0.1, 0.2}, 1e-3, 4);
  REQUIRE(rep.increments.size() == 2);
  CHECK(rep.increments[0].mean == 0.0);
  CHECK(rep.increments[0].stderr_ == 0.0);
}
