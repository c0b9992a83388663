// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "commute/problem.hpp"

namespace commute {

struct PolicyConfig {
  std::string kind;  // static | reset-sstar | dynamic-optimal | steep
  int n = 0;         // steep only
  std::string base = "optimal";  // steep / reset-sstar: "optimal" or "initial"
};

struct McConfig {
  std::size_t n_paths = 100000;
  double dt = 1e-4;
  std::uint64_t seed = 1;
  std::optional<double> x0;  // default i0
  std::vector<PolicyConfig> policies;
  bool per_path = false;
};

struct VerifyConfig {
  std::vector<std::string> checks;
  std::size_t n_paths = 20000;
  double dt = 1e-4;
  std::vector<double> checkpoints{0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
  double perturb = 0.0;  // relative perturbation of the feedback density
};

struct ValueConfig {
  std::size_t curve_points = 101;
  std::optional<double> i;  // default i0; i == ell is the degenerate case
};

struct OdeConfig {
  double tolerance = 1e-6;  // bound on the Richardson error and on |Delta|
};

struct OutputConfig {
  std::string directory = ".";
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  ProblemSpec problem;
  McConfig mc;
  VerifyConfig verify;
  ValueConfig value;
  OdeConfig ode;
  OutputConfig output;
};

/// Parses and validates a JSON configuration. Unknown keys and type errors
/// raise ConfigError naming the key path; syntax errors report line and column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace commute
