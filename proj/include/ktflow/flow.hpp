#pragma once

// Pluriclosed flow d/dt omega = -(rho^B)^{1,1} restricted to the invariant
// family. s is frozen; r, u1, u2 evolve by the method of lines with classical
// RK4 in time and spectral derivatives in space.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ktflow/deform.hpp"
#include "ktflow/error.hpp"
#include "ktflow/geometry.hpp"
#include "ktflow/grid.hpp"
#include "ktflow/metric.hpp"
#include "ktflow/parallel.hpp"

namespace ktflow {

/// Evolution law for r; the u- and s-equations are shared.
///   newsystem: r' = 1/2 lap log F + (h3^2 + h4^2) F / s^2 + (1/s) d/dt |u|^2
///   bismut:    r' = 1/2 lap log F + (h1)_y + (h2)_x + h3
enum class RhsVariant { newsystem, bismut };

inline std::string_view to_string(RhsVariant v) {
  return v == RhsVariant::newsystem ? "newsystem" : "bismut";
}

inline RhsVariant parse_rhs_variant(std::string_view s) {
  if (s == "newsystem") return RhsVariant::newsystem;
  if (s == "bismut") return RhsVariant::bismut;
  throw ConfigError("unknown rhs variant '" + std::string(s) + "' (newsystem|bismut)");
}

struct FlowRhs {
  ScalarField r_dot, u1_dot, u2_dot;
};

/// u1' = -(h3)_x / 2 + (h4)_y / 2,  u2' = (h3)_y / 2 + (h4)_x / 2,  s' = 0.
inline FlowRhs flow_rhs(const HermitianMetricField& m, RhsVariant variant) {
  detail::require_pluriclosed(m, "flow");
  const GridSpec g = m.spec();
  const LeeData lee = lee_form(m, false);
  const ScalarField F = det_function(m);

  Gradient d3{ScalarField(g), ScalarField(g)}, d4{ScalarField(g), ScalarField(g)};
  ScalarField lapLogF(g), h1y(g), h2x(g);
  std::vector<std::function<void()>> tasks{
      [&] { d3 = gradient(lee.h3); },
      [&] { d4 = gradient(lee.h4); },
      [&] { lapLogF = laplacian(map(F, [](double v) { return std::log(v); })); },
  };
  if (variant == RhsVariant::bismut) {
    tasks.emplace_back([&] { h1y = partial_derivative(lee.h1, Axis::y); });
    tasks.emplace_back([&] { h2x = partial_derivative(lee.h2, Axis::x); });
  }
  parallel::run_all(tasks);

  FlowRhs out{ScalarField(g), ScalarField(g), ScalarField(g)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double u1d = -0.5 * d3.dx[k] + 0.5 * d4.dy[k];
    const double u2d = 0.5 * d3.dy[k] + 0.5 * d4.dx[k];
    out.u1_dot[k] = u1d;
    out.u2_dot[k] = u2d;
    const double s = m.s()[k];
    if (variant == RhsVariant::newsystem) {
      const double h2sum = lee.h3[k] * lee.h3[k] + lee.h4[k] * lee.h4[k];
      const double du2 = 2.0 * m.u1()[k] * u1d + 2.0 * m.u2()[k] * u2d;
      out.r_dot[k] = 0.5 * lapLogF[k] + h2sum * F[k] / (s * s) + du2 / s;
    } else {
      out.r_dot[k] = 0.5 * lapLogF[k] + h1y[k] + h2x[k] + lee.h3[k];
    }
  }
  return out;
}

/// dt = safety * dx^2 * min(F) / s with dx = 1/n.
inline double select_timestep(const HermitianMetricField& m, double safety = 0.2) {
  const double dx = 1.0 / m.spec().n();
  const double fmin = spatial_stats(det_function(m)).min;
  const double smax = m.s().max_abs();
  return safety * dx * dx * fmin / smax;
}

/// As above, additionally capped by the time left until t_end.
inline double select_timestep(const HermitianMetricField& m, double safety, double t,
                              double t_end) {
  return std::min(select_timestep(m, safety), t_end - t);
}

struct FlowState {
  double t = 0.0;
  HermitianMetricField metric;
  double dt = 0.0;
  long step_index = 0;
};

/// Raised when the step retries are exhausted; carries the last valid state.
class StabilityFailure : public Error {
 public:
  StabilityFailure(const std::string& what, FlowState last)
      : Error(what), last_good_(std::move(last)) {}
  const FlowState& last_good() const noexcept { return last_good_; }

 private:
  FlowState last_good_;
};

namespace detail {

inline HermitianMetricField advance(const HermitianMetricField& m, const FlowRhs& k, double h) {
  ScalarField r = m.r(), u1 = m.u1(), u2 = m.u2();
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] += h * k.r_dot[i];
    u1[i] += h * k.u1_dot[i];
    u2[i] += h * k.u2_dot[i];
  }
  return {std::move(r), m.s(), std::move(u1), std::move(u2)};
}

inline void require_finite_rhs(const FlowRhs& k) {
  if (!k.r_dot.all_finite() || !k.u1_dot.all_finite() || !k.u2_dot.all_finite())
    throw PositivityError("non-finite right-hand side");
}

/// One classical RK4 step. Throws PositivityError if a stage leaves the
/// admissible set or produces non-finite values.
inline HermitianMetricField rk4(const HermitianMetricField& m, double dt, RhsVariant v) {
  const FlowRhs k1 = flow_rhs(m, v);
  require_finite_rhs(k1);
  const FlowRhs k2 = flow_rhs(advance(m, k1, 0.5 * dt), v);
  require_finite_rhs(k2);
  const FlowRhs k3 = flow_rhs(advance(m, k2, 0.5 * dt), v);
  require_finite_rhs(k3);
  const FlowRhs k4 = flow_rhs(advance(m, k3, dt), v);
  require_finite_rhs(k4);
  ScalarField r = m.r(), u1 = m.u1(), u2 = m.u2();
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] += w * (k1.r_dot[i] + 2.0 * k2.r_dot[i] + 2.0 * k3.r_dot[i] + k4.r_dot[i]);
    u1[i] += w * (k1.u1_dot[i] + 2.0 * k2.u1_dot[i] + 2.0 * k3.u1_dot[i] + k4.u1_dot[i]);
    u2[i] += w * (k1.u2_dot[i] + 2.0 * k2.u2_dot[i] + 2.0 * k3.u2_dot[i] + k4.u2_dot[i]);
  }
  return {std::move(r), m.s(), std::move(u1), std::move(u2)};
}

}  // namespace detail

inline constexpr int kMaxStepRetries = 10;

/// Advances by dt (halving up to kMaxStepRetries times on failure). The
/// returned state records the dt actually taken.
inline FlowState step(const FlowState& state, double dt, RhsVariant variant) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  std::string last_error;
  for (int attempt = 0; attempt <= kMaxStepRetries; ++attempt) {
    try {
      HermitianMetricField next = detail::rk4(state.metric, dt, variant);
      return {state.t + dt, std::move(next), dt, state.step_index + 1};
    } catch (const PositivityError& e) {
      last_error = e.what();
      dt *= 0.5;
    }
  }
  throw StabilityFailure("positivity/stability failure at t=" + std::to_string(state.t) +
                             " after " + std::to_string(kMaxStepRetries) +
                             " retries: " + last_error,
                         state);
}

struct MonitorRecord {
  double t = 0.0, dt = 0.0;
  double F_min = 0.0, F_max = 0.0;
  double r_mean = 0.0;
  double h3_mean = 0.0, h3_std = 0.0, h4_mean = 0.0, h4_std = 0.0;
  double lee_residual = 0.0;
  double ricci_xcheck_residual = 0.0;
  double pluriclosed_residual = 0.0;
  double u_drift = 0.0;
};

inline constexpr std::string_view kMonitorCsvHeader =
    "t,dt,F_min,F_max,r_mean,h3_mean,h3_std,h4_mean,h4_std,lee_residual,"
    "ricci_xcheck_residual,pluriclosed_residual,u_drift";

inline std::array<double, 13> monitor_values(const MonitorRecord& r) {
  return {r.t,       r.dt,     r.F_min,        r.F_max,
          r.r_mean,  r.h3_mean, r.h3_std,      r.h4_mean,
          r.h4_std,  r.lee_residual, r.ricci_xcheck_residual, r.pluriclosed_residual,
          r.u_drift};
}

inline MonitorRecord make_monitor(const FlowState& st, const ScalarField& u1_0,
                                  const ScalarField& u2_0) {
  const HermitianMetricField& m = st.metric;
  MonitorRecord rec;
  rec.t = st.t;
  rec.dt = st.dt;
  const FieldStats fs = spatial_stats(det_function(m));
  rec.F_min = fs.min;
  rec.F_max = fs.max;
  rec.r_mean = spatial_stats(m.r()).mean;
  const LeeData lee = lee_form(m);
  rec.h3_mean = lee.h3_stats.mean;
  rec.h3_std = lee.h3_stats.std;
  rec.h4_mean = lee.h4_stats.mean;
  rec.h4_std = lee.h4_stats.std;
  rec.lee_residual = lee.residual;
  const PluriclosedCheck pc = pluriclosed_residual(m);
  rec.pluriclosed_residual = pc.residual;
  rec.ricci_xcheck_residual =
      pc.is_pluriclosed ? max_abs_diff(bismut_ricci_11(m, RicciRoute::formula, lee),
                                       bismut_ricci_11(m, RicciRoute::relation, lee))
                        : std::numeric_limits<double>::quiet_NaN();
  rec.u_drift = std::max(max_abs_diff(m.u1(), u1_0), max_abs_diff(m.u2(), u2_0));
  return rec;
}

struct FlowOptions {
  double t_start = 0.0;  // non-zero when restarting from a snapshot
  double t_end = 1.0;
  double safety = 0.2;
  RhsVariant variant = RhsVariant::newsystem;
  int monitor_every = 10;
  std::vector<double> snapshot_times;
  std::optional<double> fixed_dt;  // bypasses the stability-based step choice
};

inline void validate(const FlowOptions& o) {
  if (!(o.t_end > 0.0) || !std::isfinite(o.t_end)) throw ConfigError("flow.t_end must be > 0");
  if (!(o.t_start >= 0.0 && o.t_start < o.t_end))
    throw ConfigError("start time must lie in [0, t_end)");
  if (!(o.safety > 0.0 && o.safety <= 1.0)) throw ConfigError("flow.safety must be in (0, 1]");
  if (o.monitor_every < 1) throw ConfigError("flow.monitor_every must be >= 1");
  if (o.fixed_dt && !(*o.fixed_dt > 0.0)) throw ConfigError("flow.fixed_dt must be > 0");
  for (double t : o.snapshot_times)
    if (!(t >= o.t_start && t <= o.t_end))
      throw ConfigError("snapshot time " + std::to_string(t) + " outside [start, t_end]");
}

enum class Termination { reached_t_end, positivity_failure };

inline std::string_view to_string(Termination t) {
  return t == Termination::reached_t_end ? "reached_t_end" : "positivity_failure";
}

struct RunCallbacks {
  std::function<void(const MonitorRecord&)> on_monitor;
  std::function<void(const FlowState&)> on_snapshot;
};

struct RunResult {
  FlowState final_state;
  std::vector<MonitorRecord> monitors;
  Termination termination = Termination::reached_t_end;
  std::string message;
};

/// Integrates from `initial` to t_end. Monitors are recorded at step 0, every
/// monitor_every steps and at the final state; steps are shortened to land
/// exactly on snapshot times.
inline RunResult run(const HermitianMetricField& initial, const FlowOptions& opt,
                     const RunCallbacks& cb = {}) {
  validate(opt);
  detail::require_pluriclosed(initial, "flow");
  std::vector<double> snaps = opt.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  std::size_t next_snap = 0;

  const ScalarField u1_0 = initial.u1(), u2_0 = initial.u2();
  RunResult res{FlowState{opt.t_start, initial, 0.0, 0}, {}, Termination::reached_t_end, {}};
  FlowState& st = res.final_state;
  auto monitor = [&] {
    res.monitors.push_back(make_monitor(st, u1_0, u2_0));
    if (cb.on_monitor) cb.on_monitor(res.monitors.back());
  };
  auto emit_snapshots = [&] {
    while (next_snap < snaps.size() && snaps[next_snap] <= st.t) {
      if (cb.on_snapshot) cb.on_snapshot(st);
      ++next_snap;
    }
  };

  monitor();
  emit_snapshots();
  long last_monitored = 0;
  while (st.t < opt.t_end) {
    double target = opt.t_end;
    if (next_snap < snaps.size()) target = std::min(target, snaps[next_snap]);
    double dt = opt.fixed_dt ? *opt.fixed_dt : select_timestep(st.metric, opt.safety);
    const bool capped = dt >= target - st.t;
    if (capped) dt = target - st.t;
    try {
      FlowState next = step(st, dt, opt.variant);
      // A step that was not shortened by retries lands exactly on the target.
      if (capped && next.dt == dt) next.t = target;
      st = std::move(next);
    } catch (const StabilityFailure& e) {
      res.termination = Termination::positivity_failure;
      res.message = e.what();
      st = e.last_good();
      break;
    }
    if (st.step_index % opt.monitor_every == 0) {
      monitor();
      last_monitored = st.step_index;
    }
    emit_snapshots();
  }
  if (last_monitored != st.step_index) monitor();
  return res;
}

/// Closed-form r(t) for spatially constant data: F F' = s^3, so
/// F(t) = sqrt(F0^2 + 2 s^3 t) and r = (F + |u0|^2) / s.
inline double constant_data_oracle(double r0, double s, double u01, double u02, double t) {
  const double u2 = u01 * u01 + u02 * u02;
  const double F0 = r0 * s - u2;
  if (!(F0 > 0.0) || !(s > 0.0)) throw InvalidArgument("constant data not positive");
  if (!(t >= 0.0)) throw InvalidArgument("oracle time must be >= 0");
  const double F = std::sqrt(F0 * F0 + 2.0 * s * s * s * t);
  return (F + u2) / s;
}

struct DriftReport {
  RhsVariant variant = RhsVariant::newsystem;
  bool preserved_within_tol = false;
  double drift_rate = 0.0;      // least-squares slope of h3_std over the early records
  double max_h3_rel_std = 0.0;  // max over records of h3_std / |h3_mean|
  double max_h4_std = 0.0;
  double t_final = 0.0;
  std::size_t records = 0;
  Termination termination = Termination::reached_t_end;
  std::string message;
};

/// Least-squares slope of y against t over the first max(2, ceil(N/4))
/// records; 0 when fewer than two records exist.
inline double early_slope(const std::vector<MonitorRecord>& recs,
                          double MonitorRecord::*field) {
  const std::size_t N = recs.size();
  if (N < 2) return 0.0;
  const std::size_t m = std::min(N, std::max<std::size_t>(2, (N + 3) / 4));
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    tm += recs[i].t;
    ym += recs[i].*field;
  }
  tm /= static_cast<double>(m);
  ym /= static_cast<double>(m);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    num += (recs[i].t - tm) * (recs[i].*field - ym);
    den += (recs[i].t - tm) * (recs[i].t - tm);
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Drift summary of a finished run; a state counts as Vaisman when
/// std(h3) <= tol (1 + |mean h3|) and likewise for h4.
inline DriftReport drift_report(const RunResult& res, RhsVariant variant, double tol = 1e-9) {
  DriftReport rep;
  rep.variant = variant;
  rep.termination = res.termination;
  rep.message = res.message;
  rep.t_final = res.final_state.t;
  rep.records = res.monitors.size();
  rep.preserved_within_tol = true;
  for (const auto& r : res.monitors) {
    const double rel = std::abs(r.h3_mean) > 0.0 ? r.h3_std / std::abs(r.h3_mean) : r.h3_std;
    rep.max_h3_rel_std = std::max(rep.max_h3_rel_std, rel);
    rep.max_h4_std = std::max(rep.max_h4_std, r.h4_std);
    if (r.h3_std > tol * (1.0 + std::abs(r.h3_mean)) ||
        r.h4_std > tol * (1.0 + std::abs(r.h4_mean)))
      rep.preserved_within_tol = false;
  }
  rep.drift_rate = early_slope(res.monitors, &MonitorRecord::h3_std);
  return rep;
}

/// Flows the type II deformation of e12 + e34 by f and measures how far h3,
/// h4 move away from spatial constancy. A positivity event does not throw:
/// the partial trajectory is reported instead.
inline DriftReport vaisman_drift_experiment(const ScalarField& f, double t_end,
                                            RhsVariant variant, double tol = 1e-9,
                                            int monitor_every = 10, double safety = 0.2) {
  const Deformation d = type_two_deform(f);
  FlowOptions opt;
  opt.t_end = t_end;
  opt.safety = safety;
  opt.variant = variant;
  opt.monitor_every = monitor_every;
  return drift_report(run(d.metric, opt), variant, tol);
}

}  // namespace ktflow
