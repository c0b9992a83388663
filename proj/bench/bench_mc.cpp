// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Serial reference against the OpenMP kernel on the same path streams.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "commute/simulator.hpp"

namespace {

using namespace commute;

PathModel model(int which) {
  ProblemSpec sp;
  sp.ell = 0.25;
  sp.i0 = 0.75;
  sp.grid_n = 2049;
  SimOptions opt;
  opt.dt = 1e-3;
  const auto s0 = ScaleFunction::initial(sp);
  if (which == 0) return PathModel(sp, Policy::static_scale(s0), opt);
  if (which == 1) return PathModel(sp, Policy::reset_sstar(s0), opt);
  return PathModel(sp, Policy::dynamic_optimal(optimal_scale(sp)), opt);
}

void label(benchmark::State& state) {
  static const char* names[] = {"static", "reset-sstar", "dynamic-optimal"};
  state.SetLabel(names[state.range(0)]);
}

void BM_Serial(benchmark::State& state) {
  const auto m = model(static_cast<int>(state.range(0)));
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_paths_serial(m, 0.75, n, 1));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  label(state);
}

void BM_Parallel(benchmark::State& state) {
  const auto m = model(static_cast<int>(state.range(0)));
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_paths_parallel(m, 0.75, n, 1));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  state.counters["threads"] = omp_get_max_threads();
  label(state);
}

}  // namespace

BENCHMARK(BM_Serial)->ArgsProduct({{0, 1, 2}, {2000}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Parallel)->ArgsProduct({{0, 1, 2}, {2000}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
