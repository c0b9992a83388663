// Copyright 2026 The commute-control Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commute/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "commute/errors.hpp"
#include "commute/measures.hpp"

namespace commute {

namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    std::ostringstream os;
    os << "config: " << path << ": " << what;
    const auto key = path.substr(path.find_last_of('.') + 1);
    const auto pos = text_.find('"' + key + '"');
    if (pos != std::string::npos) {
      os << " (line " << 1 + std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n')
         << ")";
    }
    throw ConfigError(os.str());
  }

  void only_keys(const json& obj, const std::string& path, std::set<std::string> allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
      if (!allowed.count(k)) fail(join(path, k), "unknown key");
    }
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "must be finite");
    return d;
  }

  std::size_t count(const json& v, const std::string& path) const {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a nonnegative integer");
    return v.get<std::size_t>();
  }

  bool boolean(const json& v, const std::string& path) const {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  Profile profile(const json& v, const std::string& path) const {
    if (v.is_number()) return Profile::constant(number(v, path));
    if (!v.is_object() || !v.contains("type")) fail(path, "expected a number or a profile object");
    const auto type = string(v["type"], join(path, "type"));
    if (type == "constant") {
      only_keys(v, path, {"type", "value"});
      return Profile::constant(number(need(v, path, "value"), join(path, "value")));
    }
    if (type == "affine") {
      only_keys(v, path, {"type", "a", "b"});
      return Profile::affine(number(need(v, path, "a"), join(path, "a")),
                             number(need(v, path, "b"), join(path, "b")));
    }
    if (type == "exponential") {
      only_keys(v, path, {"type", "c", "k"});
      return Profile::exponential(number(need(v, path, "c"), join(path, "c")),
                                  number(need(v, path, "k"), join(path, "k")));
    }
    if (type == "tabulated") {
      only_keys(v, path, {"type", "values"});
      const auto& arr = need(v, path, "values");
      if (!arr.is_array() || arr.size() < 2) fail(join(path, "values"), "expected at least 2 numbers");
      std::vector<double> vals;
      for (std::size_t j = 0; j < arr.size(); ++j) {
        vals.push_back(number(arr[j], join(path, "values") + "[" + std::to_string(j) + "]"));
      }
      return Profile::tabulated(std::move(vals));
    }
    fail(join(path, "type"), "unknown profile type '" + type + "'");
  }

  const json& need(const json& obj, const std::string& path, const std::string& key) const {
    if (!obj.contains(key)) fail(join(path, key), "missing required key");
    return obj[key];
  }

  static std::string join(const std::string& a, const std::string& b) {
    return a.empty() ? b : a + "." + b;
  }

 private:
  const std::string& text_;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const auto upto = text.substr(0, byte);
    const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
    const auto nl = upto.find_last_of('\n');
    const auto col = nl == std::string::npos ? byte : byte - nl - 1;
    throw ConfigError("config: syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  const Reader rd(text);
  RunConfig cfg;
  rd.only_keys(root, "", {"problem", "grid_n", "mc", "verify", "value", "ode", "output"});

  const auto& pr = rd.need(root, "", "problem");
  rd.only_keys(pr, "problem", {"sigma", "f", "ell", "i0", "s0_prime", "drift", "grid_n"});
  auto& p = cfg.problem;
  if (pr.contains("sigma")) p.sigma = rd.profile(pr["sigma"], "problem.sigma");
  if (pr.contains("f")) p.f = rd.profile(pr["f"], "problem.f");
  p.ell = rd.number(rd.need(pr, "problem", "ell"), "problem.ell");
  p.i0 = rd.number(rd.need(pr, "problem", "i0"), "problem.i0");
  if (pr.contains("s0_prime") && pr.contains("drift")) {
    rd.fail("problem.drift", "give either s0_prime or drift, not both");
  }
  if (pr.contains("s0_prime")) p.s0_prime = rd.profile(pr["s0_prime"], "problem.s0_prime");
  if (pr.contains("grid_n")) p.grid_n = rd.count(pr["grid_n"], "problem.grid_n");
  if (root.contains("grid_n")) p.grid_n = rd.count(root["grid_n"], "grid_n");
  if (pr.contains("drift")) {
    // s0' = exp(-2 int mu / sigma^2), kept in closed form where possible.
    const Profile mu = rd.profile(pr["drift"], "problem.drift");
    if (mu.kind() == Profile::Kind::constant && p.sigma.kind() == Profile::Kind::constant) {
      const double s = p.sigma(0.0);
      p.s0_prime = Profile::exponential(1.0, -2.0 * mu(0.0) / (s * s));
    } else {
      if (!(p.sigma.min_value() > 0.0)) rd.fail("problem.sigma", "must be strictly positive");
      const auto s0 = scale_from_drift(GridLayout::uniform(0.0, 1.0, p.grid_n), mu, p.sigma);
      const auto vals = s0.density().piece(0).values();
      p.s0_prime = Profile::tabulated(std::vector<double>(vals.begin(), vals.end()));
    }
  }
  try {
    p.validate();
  } catch (const ConfigError& e) {
    rd.fail("problem", e.what());
  }

  if (root.contains("mc")) {
    const auto& mc = root["mc"];
    rd.only_keys(mc, "mc", {"n_paths", "dt", "seed", "x0", "policies", "per_path"});
    if (mc.contains("n_paths")) cfg.mc.n_paths = rd.count(mc["n_paths"], "mc.n_paths");
    if (mc.contains("dt")) cfg.mc.dt = rd.number(mc["dt"], "mc.dt");
    if (mc.contains("seed")) cfg.mc.seed = rd.count(mc["seed"], "mc.seed");
    if (mc.contains("x0")) cfg.mc.x0 = rd.number(mc["x0"], "mc.x0");
    if (mc.contains("per_path")) cfg.mc.per_path = rd.boolean(mc["per_path"], "mc.per_path");
    if (mc.contains("policies")) {
      const auto& arr = mc["policies"];
      if (!arr.is_array()) rd.fail("mc.policies", "expected an array");
      for (std::size_t j = 0; j < arr.size(); ++j) {
        const std::string path = "mc.policies[" + std::to_string(j) + "]";
        PolicyConfig pc;
        if (arr[j].is_string()) {
          pc.kind = arr[j].get<std::string>();
        } else {
          rd.only_keys(arr[j], path, {"kind", "n", "base"});
          pc.kind = rd.string(rd.need(arr[j], path, "kind"), path + ".kind");
          if (arr[j].contains("n")) pc.n = static_cast<int>(rd.count(arr[j]["n"], path + ".n"));
          if (arr[j].contains("base")) pc.base = rd.string(arr[j]["base"], path + ".base");
        }
        static const std::set<std::string> kinds{"static", "reset-sstar", "dynamic-optimal", "steep"};
        if (!kinds.count(pc.kind)) rd.fail(path + ".kind", "unknown policy '" + pc.kind + "'");
        if (pc.kind == "steep" && pc.n <= 0) rd.fail(path + ".n", "steep needs n >= 1");
        if (pc.base != "optimal" && pc.base != "initial") {
          rd.fail(path + ".base", "expected 'optimal' or 'initial'");
        }
        cfg.mc.policies.push_back(pc);
      }
    }
    if (!(cfg.mc.dt > 0.0)) rd.fail("mc.dt", "must be positive");
    if (cfg.mc.n_paths < 2) rd.fail("mc.n_paths", "must be at least 2");
    if (cfg.mc.x0 && !(*cfg.mc.x0 >= 0.0 && *cfg.mc.x0 <= 1.0)) rd.fail("mc.x0", "must lie in [0,1]");
  }
  if (cfg.mc.policies.empty()) {
    cfg.mc.policies = {{"dynamic-optimal"}, {"static"}, {"reset-sstar", 0, "initial"}};
  }

  if (root.contains("verify")) {
    const auto& v = root["verify"];
    rd.only_keys(v, "verify", {"checks", "n_paths", "dt", "checkpoints", "perturb"});
    if (v.contains("checks")) {
      const auto& arr = v["checks"];
      if (!arr.is_array()) rd.fail("verify.checks", "expected an array");
      for (std::size_t j = 0; j < arr.size(); ++j) {
        cfg.verify.checks.push_back(rd.string(arr[j], "verify.checks[" + std::to_string(j) + "]"));
      }
    } else {
      cfg.verify.checks = {"commute_identity", "dual_payoff", "dual_value", "infimum_law",
                           "delta_residual", "submartingale"};
    }
    if (v.contains("n_paths")) cfg.verify.n_paths = rd.count(v["n_paths"], "verify.n_paths");
    if (v.contains("dt")) cfg.verify.dt = rd.number(v["dt"], "verify.dt");
    if (v.contains("perturb")) cfg.verify.perturb = rd.number(v["perturb"], "verify.perturb");
    if (v.contains("checkpoints")) {
      const auto& arr = v["checkpoints"];
      if (!arr.is_array()) rd.fail("verify.checkpoints", "expected an array");
      cfg.verify.checkpoints.clear();
      for (std::size_t j = 0; j < arr.size(); ++j) {
        cfg.verify.checkpoints.push_back(
            rd.number(arr[j], "verify.checkpoints[" + std::to_string(j) + "]"));
      }
    }
    if (!(cfg.verify.dt > 0.0)) rd.fail("verify.dt", "must be positive");
    if (cfg.verify.n_paths < 2) rd.fail("verify.n_paths", "must be at least 2");
  } else {
    cfg.verify.checks = {"commute_identity", "dual_payoff", "dual_value", "infimum_law",
                         "delta_residual", "submartingale"};
  }
  static const std::set<std::string> known{"commute_identity", "dual_payoff", "dual_value",
                                           "infimum_law", "delta_residual", "submartingale"};
  for (std::size_t j = 0; j < cfg.verify.checks.size(); ++j) {
    if (!known.count(cfg.verify.checks[j])) {
      rd.fail("verify.checks[" + std::to_string(j) + "]",
              "unknown check '" + cfg.verify.checks[j] + "'");
    }
  }

  if (root.contains("value")) {
    const auto& v = root["value"];
    rd.only_keys(v, "value", {"curve_points", "i"});
    if (v.contains("curve_points")) cfg.value.curve_points = rd.count(v["curve_points"], "value.curve_points");
    if (cfg.value.curve_points < 2) rd.fail("value.curve_points", "must be at least 2");
    if (v.contains("i")) {
      cfg.value.i = rd.number(v["i"], "value.i");
      if (!(*cfg.value.i >= p.ell && *cfg.value.i <= p.i0)) rd.fail("value.i", "must lie in [ell, i0]");
    }
  }
  if (root.contains("ode")) {
    const auto& v = root["ode"];
    rd.only_keys(v, "ode", {"tolerance", "step"});
    if (v.contains("tolerance")) cfg.ode.tolerance = rd.number(v["tolerance"], "ode.tolerance");
    if (!(cfg.ode.tolerance > 0.0)) rd.fail("ode.tolerance", "must be positive");
    if (v.contains("step")) {
      // The ODE runs on the problem grid, so a step sets grid_n.
      const double h = rd.number(v["step"], "ode.step");
      if (!(h > 0.0 && h <= 0.125)) rd.fail("ode.step", "must lie in (0, 1/8]");
      p.grid_n = static_cast<std::size_t>(std::llround(1.0 / h)) + 1;
    }
  }
  if (root.contains("output")) {
    const auto& v = root["output"];
    rd.only_keys(v, "output", {"per_path", "directory", "formats"});
    if (v.contains("per_path")) cfg.mc.per_path = rd.boolean(v["per_path"], "output.per_path");
    if (v.contains("directory")) cfg.output.directory = rd.string(v["directory"], "output.directory");
    if (v.contains("formats")) {
      const auto& arr = v["formats"];
      if (!arr.is_array()) rd.fail("output.formats", "expected an array");
      cfg.output.csv = cfg.output.json = false;
      for (std::size_t j = 0; j < arr.size(); ++j) {
        const auto path = "output.formats[" + std::to_string(j) + "]";
        const auto f = rd.string(arr[j], path);
        if (f == "csv") cfg.output.csv = true;
        else if (f == "json") cfg.output.json = true;
        else rd.fail(path, "unknown format '" + f + "', expected 'csv' or 'json'");
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace commute
