// ktflow: command-line front end for the invariant pluriclosed flow.
//
// Exit codes: 0 success, 2 configuration / parse error, 3 positivity or
// stability event, 4 verification failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "ktflow/config.hpp"
#include "ktflow/flow.hpp"
#include "ktflow/geometry.hpp"
#include "ktflow/io.hpp"
#include "ktflow/verify.hpp"

namespace fs = std::filesystem;
using namespace ktflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPositivity = 3;
constexpr int kExitVerify = 4;

struct Flags {
  std::string config;
  std::string out;
  std::string rhs_variant;
  std::optional<int> grid_n;
  std::optional<double> tol;
};

RunConfig load_with_overrides(const Flags& f) {
  if (f.config.empty()) throw ConfigError("--config is required");
  RunConfig c = load_config(f.config);
  if (f.grid_n) c.n = *f.grid_n;
  if (f.tol) c.vaisman_tol = *f.tol;
  if (!f.rhs_variant.empty()) c.flow.variant = parse_rhs_variant(f.rhs_variant);
  if (!f.out.empty()) c.output_dir = f.out;
  validate(c);
  return c;
}

void print(const io::Json& j) { std::cout << io::dump(j) << std::flush; }

int cmd_init(const Flags& f) {
  const RunConfig c = load_with_overrides(f);
  const InitialState init = build_initial(c);
  const fs::path path = c.output_dir / io::snapshot_filename(init.t0);
  io::write_text(path, io::dump(io::snapshot_json(init.metric, init.t0)));
  io::Json j;
  j["snapshot"] = path.string();
  if (init.profile) j["admissibility_margin"] = init.profile->margin;
  j["analysis"] = io::analysis_json(analyze_metric(init.metric, c.vaisman_tol));
  print(j);
  return kExitOk;
}

int cmd_evolve(const Flags& f) {
  const RunConfig c = load_with_overrides(f);
  const InitialState init = build_initial(c);
  if (!pluriclosed_residual(init.metric).is_pluriclosed)
    throw NotPluriclosed("initial metric is not pluriclosed (s is not constant)");
  FlowOptions opt = c.flow;
  opt.t_start = init.t0;
  validate(opt);

  RunCallbacks cb;
  cb.on_snapshot = [&](const FlowState& st) {
    io::write_text(c.output_dir / io::snapshot_filename(st.t),
                   io::dump(io::snapshot_json(st.metric, st.t)));
  };
  const RunResult res = run(init.metric, opt, cb);
  io::write_text(c.output_dir / "monitor.csv", io::monitor_csv(res.monitors));

  bool invariants_ok = true;
  for (const auto& m : res.monitors)
    if (!(m.pluriclosed_residual <= c.residual_tol) || !(m.F_min > 0.0)) invariants_ok = false;

  io::Json report;
  report["termination"] = std::string(to_string(res.termination));
  report["message"] = res.message;
  report["rhs_variant"] = std::string(to_string(opt.variant));
  report["t_final"] = res.final_state.t;
  report["steps"] = res.final_state.step_index;
  report["monitor_records"] = res.monitors.size();
  report["invariants_ok"] = invariants_ok;
  const FieldStats rs = spatial_stats(res.final_state.metric.r());
  report["r_final"] = {{"mean", rs.mean}, {"min", rs.min}, {"max", rs.max}};
  report["analysis"] = io::analysis_json(analyze_metric(res.final_state.metric, c.vaisman_tol));
  if (init.profile) report["drift"] = io::drift_json(drift_report(res, opt.variant, c.vaisman_tol));
  io::write_text(c.output_dir / "report.json", io::dump(report));
  io::write_text(c.output_dir / io::snapshot_filename(res.final_state.t),
                 io::dump(io::snapshot_json(res.final_state.metric, res.final_state.t)));
  print(report);
  return res.termination == Termination::reached_t_end ? kExitOk : kExitPositivity;
}

int cmd_analyze(const std::string& snapshot, const Flags& f) {
  const io::Snapshot s = io::read_snapshot(snapshot);
  print(io::analysis_json(analyze_metric(s.metric, f.tol.value_or(1e-9))));
  return kExitOk;
}

int cmd_verify(const Flags& f, bool flip) {
  verify::Options opt;
  if (f.grid_n) opt.n = *f.grid_n;
  if (f.tol) opt.tol = *f.tol;
  opt.flip_dj_theta = flip;
  const verify::Summary s = verify::run(opt);
  const io::Json j = verify::summary_json(s, opt);
  if (!f.out.empty()) io::write_text(fs::path(f.out) / "verify.json", io::dump(j));
  print(j);
  return s.all_passed() ? kExitOk : kExitVerify;
}

int cmd_drift(const Flags& f) {
  // Defaults: one-mode profile, eps = 0.005, n = 32, t_end = 0.2.
  RunConfig c;
  c.n = 32;
  c.initial.preset = Preset::type2;
  c.initial.profile = "one-mode";
  c.initial.eps = 0.005;
  c.flow.t_end = 0.2;
  if (!f.config.empty()) {
    c = load_with_overrides(f);
    if (c.initial.preset != Preset::type2)
      throw ConfigError("drift needs initial.preset = type2");
  } else {
    if (f.grid_n) c.n = *f.grid_n;
    if (f.tol) c.vaisman_tol = *f.tol;
    validate(c);
  }
  const DeformProfile p = build_profile(c);
  io::Json j;
  j["profile"] = p.name;
  j["eps"] = p.eps;
  j["n"] = *c.n;
  j["t_end"] = c.flow.t_end;
  j["admissibility_margin"] = p.margin;
  io::Json reports = io::Json::array();
  auto one = [&](RhsVariant v) {
    reports.push_back(io::drift_json(vaisman_drift_experiment(
        p.f, c.flow.t_end, v, c.vaisman_tol, c.flow.monitor_every, c.flow.safety)));
  };
  if (!f.rhs_variant.empty()) {
    one(parse_rhs_variant(f.rhs_variant));
  } else {
    one(RhsVariant::newsystem);
    one(RhsVariant::bismut);
  }
  j["reports"] = reports;
  if (!f.out.empty()) io::write_text(fs::path(f.out) / "drift.json", io::dump(j));
  print(j);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pluriclosed flow and Vaisman geometry on the Kodaira-Thurston surface"};
  app.require_subcommand(1);
  Flags flags;
  std::string snapshot;
  bool flip = false;

  auto common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", flags.config, "run configuration (JSON)");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--grid-n", flags.grid_n, "grid points per axis (even, >= 8)");
    sub->add_option("--tol", flags.tol, "classifier / verification tolerance");
  };
  auto* init = app.add_subcommand("init", "build the initial metric and write a snapshot");
  common(init, true);
  auto* evolve = app.add_subcommand("evolve", "integrate the flow");
  common(evolve, true);
  evolve->add_option("--rhs-variant", flags.rhs_variant, "newsystem | bismut");
  auto* analyze = app.add_subcommand("analyze", "classify a snapshot");
  analyze->add_option("snapshot", snapshot, "snapshot JSON")->required();
  analyze->add_option("--tol", flags.tol, "classifier tolerance");
  auto* verify = app.add_subcommand("verify", "run the identity and oracle checks");
  common(verify, false);
  verify->add_flag("--flip-dj-theta", flip, "test fixture: flip the sign of d(J theta)");
  auto* drift = app.add_subcommand("drift", "Vaisman drift experiment");
  common(drift, true);
  drift->add_option("--rhs-variant", flags.rhs_variant, "newsystem | bismut (default: both)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*init) return cmd_init(flags);
    if (*evolve) return cmd_evolve(flags);
    if (*analyze) return cmd_analyze(snapshot, flags);
    if (*verify) return cmd_verify(flags, flip);
    if (*drift) return cmd_drift(flags);
  } catch (const PositivityError& e) {
    std::cerr << "positivity error: " << e.what() << '\n';
    return kExitPositivity;
  } catch (const StabilityFailure& e) {
    std::cerr << e.what() << '\n';
    return kExitPositivity;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
