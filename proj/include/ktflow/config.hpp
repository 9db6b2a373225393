#pragma once

// Run configuration (JSON) and construction of the initial metric.
//
//   {
//     "grid":    {"n": 32},
//     "initial": {"preset": "invariant", "r0": 2, "s": 1, "u0": [0, 0]}
//              | {"preset": "type1", "b": 1, "a1": 0, "a2": 0}
//              | {"preset": "type2", "profile": "one-mode", "eps": 0.005}
//              | {"preset": "type2", "profile": "custom", "path": "f.json"}
//              | {"preset": "snapshot", "path": "snapshot_t0.json"},
//     "flow":    {"t_end": 1, "safety": 0.2, "rhs_variant": "newsystem",
//                 "monitor_every": 10, "snapshot_times": [0, 1], "fixed_dt": null},
//     "tolerances": {"vaisman": 1e-9, "residual": 1e-9},
//     "output":  {"dir": "out"}
//   }
//
// Relative paths are resolved against the directory of the config file.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ktflow/deform.hpp"
#include "ktflow/error.hpp"
#include "ktflow/flow.hpp"
#include "ktflow/grid.hpp"
#include "ktflow/io.hpp"
#include "ktflow/metric.hpp"

namespace ktflow {

enum class Preset { invariant, type1, type2, snapshot };

struct InitialConfig {
  Preset preset = Preset::invariant;
  double r0 = 1.0, s = 1.0, u01 = 0.0, u02 = 0.0;  // invariant
  double b = 1.0, a1 = 0.0, a2 = 0.0;              // type1
  std::string profile = "one-mode";                // type2
  double eps = 0.0;
  std::filesystem::path path;                      // snapshot / custom profile
};

struct RunConfig {
  std::optional<int> n;  // may be omitted for snapshot presets
  InitialConfig initial;
  FlowOptions flow;
  double vaisman_tol = 1e-9;
  double residual_tol = 1e-9;
  std::filesystem::path output_dir = "out";
};

namespace detail {

template <class T>
T get_or(const io::Json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline const io::Json& section(const io::Json& root, const char* key) {
  static const io::Json empty = io::Json::object();
  if (!root.contains(key)) return empty;
  if (!root.at(key).is_object()) throw ConfigError(std::string(key) + " must be an object");
  return root.at(key);
}

inline Preset parse_preset(const std::string& s) {
  if (s == "invariant") return Preset::invariant;
  if (s == "type1") return Preset::type1;
  if (s == "type2") return Preset::type2;
  if (s == "snapshot") return Preset::snapshot;
  throw ConfigError("initial.preset must be one of invariant|type1|type2|snapshot, got '" + s +
                    "'");
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  if (c.n) {
    if (*c.n < 8 || *c.n % 2 != 0)
      throw ConfigError("grid.n must be even and >= 8, got " + std::to_string(*c.n));
  } else if (c.initial.preset != Preset::snapshot) {
    throw ConfigError("grid.n is required unless initial.preset is snapshot");
  }
  validate(c.flow);
  if (!(c.vaisman_tol > 0.0)) throw ConfigError("tolerances.vaisman must be > 0");
  if (!(c.residual_tol > 0.0)) throw ConfigError("tolerances.residual must be > 0");
  const InitialConfig& i = c.initial;
  if (i.preset == Preset::snapshot ||
      (i.preset == Preset::type2 && i.profile == "custom")) {
    if (i.path.empty()) throw ConfigError("initial.path is required for this preset");
    if (!std::filesystem::exists(i.path))
      throw ConfigError("initial.path does not exist: " + i.path.string());
  }
  if (i.preset == Preset::type2 && i.profile != "one-mode" && i.profile != "two-mode" &&
      i.profile != "custom")
    throw ConfigError("initial.profile must be one-mode|two-mode|custom, got '" + i.profile + "'");
  if (i.preset == Preset::type1 && !(i.b > 0.0)) throw ConfigError("initial.b must be > 0");
}

inline RunConfig config_from_json(const io::Json& root, const std::filesystem::path& base_dir = {}) {
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  const auto& grid = detail::section(root, "grid");
  if (grid.contains("n")) c.n = detail::get_or<int>(grid, "n", 0, "grid");

  const auto& init = detail::section(root, "initial");
  InitialConfig& i = c.initial;
  i.preset = detail::parse_preset(detail::get_or<std::string>(init, "preset", "invariant", "initial"));
  i.r0 = detail::get_or(init, "r0", i.r0, "initial");
  i.s = detail::get_or(init, "s", i.s, "initial");
  if (init.contains("u0")) {
    const auto u0 = detail::get_or<std::vector<double>>(init, "u0", {}, "initial");
    if (u0.size() != 2) throw ConfigError("initial.u0 must have two entries [u1, u2]");
    i.u01 = u0[0];
    i.u02 = u0[1];
  }
  i.b = detail::get_or(init, "b", i.b, "initial");
  i.a1 = detail::get_or(init, "a1", i.a1, "initial");
  i.a2 = detail::get_or(init, "a2", i.a2, "initial");
  i.profile = detail::get_or(init, "profile", i.profile, "initial");
  i.eps = detail::get_or(init, "eps", i.eps, "initial");
  if (init.contains("path")) {
    std::filesystem::path p = detail::get_or<std::string>(init, "path", "", "initial");
    i.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }

  const auto& flow = detail::section(root, "flow");
  c.flow.t_end = detail::get_or(flow, "t_end", c.flow.t_end, "flow");
  c.flow.safety = detail::get_or(flow, "safety", c.flow.safety, "flow");
  c.flow.variant = parse_rhs_variant(
      detail::get_or<std::string>(flow, "rhs_variant", "newsystem", "flow"));
  c.flow.monitor_every = detail::get_or(flow, "monitor_every", c.flow.monitor_every, "flow");
  c.flow.snapshot_times =
      detail::get_or<std::vector<double>>(flow, "snapshot_times", {}, "flow");
  if (flow.contains("fixed_dt") && !flow.at("fixed_dt").is_null())
    c.flow.fixed_dt = detail::get_or<double>(flow, "fixed_dt", 0.0, "flow");

  const auto& tol = detail::section(root, "tolerances");
  c.vaisman_tol = detail::get_or(tol, "vaisman", c.vaisman_tol, "tolerances");
  c.residual_tol = detail::get_or(tol, "residual", c.residual_tol, "tolerances");

  const auto& out = detail::section(root, "output");
  std::filesystem::path dir = detail::get_or<std::string>(out, "dir", "out", "output");
  c.output_dir = dir.is_relative() && !base_dir.empty() ? base_dir / dir : dir;
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  const io::Json j = io::parse_json(io::read_text(path), path.string());
  return config_from_json(j, path.parent_path());
}

/// Scalar potential file: {"n": 64, "f": [n*n values] | number}.
inline ScalarField read_profile(const std::filesystem::path& path,
                                std::optional<int> expected_n = std::nullopt) {
  const io::Json j = io::parse_json(io::read_text(path), path.string());
  try {
    const GridSpec g(j.at("n").get<int>());
    if (expected_n && *expected_n != g.n())
      throw ConfigError(path.string() + ": profile grid n=" + std::to_string(g.n()) +
                        " does not match grid.n=" + std::to_string(*expected_n));
    const io::Json& f = j.at("f");
    if (f.is_number()) return ScalarField(g, f.get<double>());
    auto v = f.get<std::vector<double>>();
    if (v.size() != g.size()) throw ConfigError(path.string() + ": f has the wrong length");
    return ScalarField(g, std::move(v));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline DeformProfile build_profile(const RunConfig& c) {
  const GridSpec g(*c.n);
  const InitialConfig& i = c.initial;
  if (i.profile == "one-mode") return one_mode_profile(g, i.eps);
  if (i.profile == "two-mode") return two_mode_profile(g, i.eps);
  return make_profile("custom", 0.0, read_profile(i.path, c.n));
}

/// Initial metric and its start time (non-zero only for snapshot restarts).
struct InitialState {
  HermitianMetricField metric;
  double t0 = 0.0;
  std::optional<DeformProfile> profile;
};

/// Throws PositivityError for inadmissible or non-positive presets and
/// ConfigError for unusable input files.
inline InitialState build_initial(const RunConfig& c) {
  validate(c);
  const InitialConfig& i = c.initial;
  switch (i.preset) {
    case Preset::invariant:
      return {HermitianMetricField::constant(GridSpec(*c.n), i.r0, i.s, i.u01, i.u02), 0.0, {}};
    case Preset::type1:
      return {type_one_deform(GridSpec(*c.n), i.b, i.a1, i.a2).metric, 0.0, {}};
    case Preset::type2: {
      DeformProfile p = build_profile(c);
      HermitianMetricField m = type_two_deform(p.f).metric;
      return {std::move(m), 0.0, std::move(p)};
    }
    case Preset::snapshot: {
      io::Snapshot s = io::read_snapshot(i.path);
      if (c.n && *c.n != s.metric.spec().n())
        throw ConfigError("snapshot grid n=" + std::to_string(s.metric.spec().n()) +
                          " does not match grid.n=" + std::to_string(*c.n));
      return {std::move(s.metric), s.t, {}};
    }
  }
  throw ConfigError("unknown preset");
}

}  // namespace ktflow
