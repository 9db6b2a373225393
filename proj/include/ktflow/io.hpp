#pragma once

// Snapshot / report JSON and monitor CSV. Output is deterministic: keys keep
// insertion order and floats are printed with 17 significant digits.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ktflow/error.hpp"
#include "ktflow/flow.hpp"
#include "ktflow/geometry.hpp"
#include "ktflow/grid.hpp"
#include "ktflow/metric.hpp"

namespace ktflow::io {

using Json = nlohmann::ordered_json;

/// %.17g; non-finite values become null in JSON and "nan"/"inf" in CSV.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void emit(const Json& j, std::string& out, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) { out += "{}"; return; }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(k).dump();
        out += indent < 0 ? ":" : ": ";
        emit(v, out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) { out += "[]"; return; }
      // Numeric arrays stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_number() || e.is_null(); });
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        emit(v, out, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

inline std::string dump(const Json& j, int indent = 2) {
  std::string out;
  detail::emit(j, out, indent, 0);
  out += '\n';
  return out;
}

inline Json number_or_null(std::optional<double> v) {
  return v && std::isfinite(*v) ? Json(*v) : Json(nullptr);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
  if (!os) throw ConfigError("failed writing " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(what + ": invalid JSON: " + e.what());
  }
}

inline Json field_to_json(const ScalarField& f) { return Json(f.values()); }

/// Snapshot {version: 1, t, n, s, r, u1, u2}; s is a number when constant
/// and a row-major array otherwise.
inline Json snapshot_json(const HermitianMetricField& m, double t) {
  Json j;
  j["version"] = 1;
  j["t"] = t;
  j["n"] = m.spec().n();
  const FieldStats ss = spatial_stats(m.s());
  j["s"] = ss.min == ss.max ? Json(ss.min) : field_to_json(m.s());
  j["r"] = field_to_json(m.r());
  j["u1"] = field_to_json(m.u1());
  j["u2"] = field_to_json(m.u2());
  return j;
}

struct Snapshot {
  double t = 0.0;
  HermitianMetricField metric;
};

inline Snapshot snapshot_from_json(const Json& j, const std::string& what = "snapshot") {
  try {
    if (!j.is_object()) throw ConfigError(what + ": expected an object");
    if (j.value("version", 0) != 1) throw ConfigError(what + ": unsupported version");
    const int n = j.at("n").get<int>();
    const GridSpec g(n);
    auto field = [&](const char* key) {
      const Json& a = j.at(key);
      if (a.is_number()) return ScalarField(g, a.get<double>());
      auto v = a.get<std::vector<double>>();
      if (v.size() != g.size())
        throw ConfigError(what + ": field '" + key + "' has " + std::to_string(v.size()) +
                          " values, expected " + std::to_string(g.size()));
      return ScalarField(g, std::move(v));
    };
    return {j.at("t").get<double>(),
            HermitianMetricField(field("r"), field("s"), field("u1"), field("u2"))};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  return snapshot_from_json(parse_json(read_text(path), path.string()), path.string());
}

/// snapshot_t<value>.json with the shortest round-trip spelling of t.
inline std::string snapshot_filename(double t) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, t);
  return "snapshot_t" + std::string(buf, res.ptr) + ".json";
}

inline Json stats_json(const FieldStats& s) {
  Json j;
  j["mean"] = s.mean;
  j["std"] = s.std;
  return j;
}

inline Json analysis_json(const AnalysisReport& a) {
  Json j;
  j["pluriclosed"] = a.pluriclosed;
  j["lck"] = a.lck;
  j["vaisman"] = a.vaisman;
  j["h3"] = stats_json(a.h3);
  j["h4"] = stats_json(a.h4);
  j["lee_residual"] = a.lee_residual;
  j["ricci_xcheck_residual"] = number_or_null(a.ricci_xcheck_residual);
  if (a.h_factor) {
    Json h;
    h["mean"] = a.h_factor->mean;
    h["std"] = a.h_factor->std;
    h["masked_points"] = a.h_factor->masked_points;
    j["h_factor"] = h;
  } else {
    j["h_factor"] = nullptr;
  }
  return j;
}

inline Json drift_json(const DriftReport& d) {
  Json j;
  j["variant"] = std::string(to_string(d.variant));
  j["preserved_within_tol"] = d.preserved_within_tol;
  j["drift_rate"] = d.drift_rate;
  j["max_h3_rel_std"] = d.max_h3_rel_std;
  j["max_h4_std"] = d.max_h4_std;
  j["t_final"] = d.t_final;
  j["records"] = d.records;
  j["termination"] = std::string(to_string(d.termination));
  j["message"] = d.message;
  return j;
}

inline std::string monitor_csv_row(const MonitorRecord& r) {
  std::string line;
  bool first = true;
  for (double v : monitor_values(r)) {
    if (!first) line += ',';
    first = false;
    line += format_double(v);
  }
  return line;
}

inline std::string monitor_csv(const std::vector<MonitorRecord>& recs) {
  std::string out(kMonitorCsvHeader);
  out += '\n';
  for (const auto& r : recs) {
    out += monitor_csv_row(r);
    out += '\n';
  }
  return out;
}

}  // namespace ktflow::io
