#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ktflow/deform.hpp"
#include "ktflow/ensemble.hpp"
#include "ktflow/flow.hpp"

using namespace ktflow;

namespace {

// Independent scalar RK4 for spatially constant data: r' = s^2 / (r s - |u|^2).
double brute_force_r(double r0, double s, double uu, double t_end, int steps) {
  auto f = [&](double r) { return s * s / (r * s - uu); };
  double r = r0;
  const double h = t_end / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(r), k2 = f(r + 0.5 * h * k1), k3 = f(r + 0.5 * h * k2), k4 = f(r + h * k3);
    r += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return r;
}

}  // namespace

TEST(RhsVariant, ParseAndPrint) {
  EXPECT_EQ(parse_rhs_variant("newsystem"), RhsVariant::newsystem);
  EXPECT_EQ(parse_rhs_variant("bismut"), RhsVariant::bismut);
  EXPECT_EQ(to_string(RhsVariant::bismut), "bismut");
  EXPECT_THROW(parse_rhs_variant("ricci"), ConfigError);
}

TEST(FlowRhs, ConstantData) {
  const GridSpec g(16);
  const auto m = HermitianMetricField::constant(g, 2.0, 1.5, 0.3, -0.4);
  const double F = 2.0 * 1.5 - 0.25;
  const FlowRhs a = flow_rhs(m, RhsVariant::newsystem);
  EXPECT_NEAR(a.r_dot[0], 1.5 * 1.5 / F, 1e-14);
  EXPECT_EQ(spatial_stats(a.r_dot).std, 0.0);
  EXPECT_TRUE(a.u1_dot.is_zero() && a.u2_dot.is_zero());
  const FlowRhs b = flow_rhs(m, RhsVariant::bismut);
  EXPECT_NEAR(b.r_dot[0], -1.5 * 1.5 / F, 1e-14);
  EXPECT_TRUE(b.u1_dot.is_zero() && b.u2_dot.is_zero());
}

TEST(FlowRhs, VaismanDataHasStationaryU) {
  const GridSpec g(64);
  for (const auto& m : {type_two_deform(one_mode_profile(g, 0.005).f).metric,
                        type_two_deform(two_mode_profile(g, 0.01).f).metric,
                        type_one_deform(g, 1.5, 0.2, 0.1).metric}) {
    const FlowRhs k = flow_rhs(m, RhsVariant::newsystem);
    EXPECT_LE(k.u1_dot.max_abs(), 1e-11);
    EXPECT_LE(k.u2_dot.max_abs(), 1e-11);
  }
}

TEST(FlowRhs, RejectsNonPluriclosed) {
  const GridSpec g(16);
  const auto s = ScalarField::sample(g, [](double x, double) { return 1.0 + 0.1 * std::sin(2 * std::numbers::pi * x); });
  EXPECT_THROW(flow_rhs(HermitianMetricField(ScalarField(g, 2.0), s, ScalarField(g), ScalarField(g)),
                        RhsVariant::newsystem),
               NotPluriclosed);
}

TEST(FlowRhs, VariantGapIsTheU1Defect) {
  // newsystem - bismut = 2 (h3^2 + h4^2) F / s^2 - (2/s) u1 ((h3)_x - (h4)_y)
  const auto ens = ensemble::random_pluriclosed_ensemble(GridSpec(64), 6);
  for (const auto& m : ens) {
    const LeeData lee = lee_form(m, false);
    const FlowRhs a = flow_rhs(m, RhsVariant::newsystem);
    const FlowRhs b = flow_rhs(m, RhsVariant::bismut);
    const ScalarField q = 2.0 * (lee.h3 * lee.h3 + lee.h4 * lee.h4) * det_function(m) / (m.s() * m.s());
    const ScalarField defect =
        -2.0 * m.u1() * (partial_derivative(lee.h3, Axis::x) - partial_derivative(lee.h4, Axis::y)) / m.s();
    EXPECT_LE(max_abs_diff(a.r_dot - b.r_dot - q, defect), 1e-9);
    EXPECT_EQ(max_abs_diff(a.u1_dot, b.u1_dot), 0.0);
  }
}

TEST(SelectTimestep, Examples) {
  EXPECT_DOUBLE_EQ(select_timestep(HermitianMetricField::standard(GridSpec(32))), 0.2 / 1024.0);
  EXPECT_DOUBLE_EQ(select_timestep(HermitianMetricField::constant(GridSpec(16), 2.0, 4.0), 0.5),
                   0.5 / 256.0 * 8.0 / 4.0);
  EXPECT_DOUBLE_EQ(select_timestep(HermitianMetricField::standard(GridSpec(8)), 0.2, 0.9999, 1.0),
                   1.0 - 0.9999);
}

TEST(Step, LocalErrorIsFifthOrder) {
  const GridSpec g(8);
  const auto m = HermitianMetricField::constant(g, 2.0, 1.0);
  double errs[2];
  int i = 0;
  for (double dt : {0.2, 0.1}) {
    const FlowState next = step(FlowState{0.0, m, 0.0, 0}, dt, RhsVariant::newsystem);
    EXPECT_EQ(next.t, dt);
    EXPECT_EQ(next.step_index, 1);
    errs[i++] = std::abs(next.metric.r()[0] - constant_data_oracle(2.0, 1.0, 0.0, 0.0, dt));
  }
  EXPECT_NEAR(errs[0] / errs[1], 32.0, 6.0);
}

TEST(Step, KeepsSAndConstantUBitIdentical) {
  const GridSpec g(16);
  const auto m = HermitianMetricField::constant(g, 1.0, 1.0, 0.3, 0.4);
  FlowOptions opt;
  opt.t_end = 0.25;
  const RunResult res = run(m, opt);
  EXPECT_EQ(res.termination, Termination::reached_t_end);
  EXPECT_EQ(max_abs_diff(res.final_state.metric.u1(), m.u1()), 0.0);
  EXPECT_EQ(max_abs_diff(res.final_state.metric.u2(), m.u2()), 0.0);
  EXPECT_EQ(max_abs_diff(res.final_state.metric.s(), m.s()), 0.0);
  for (const auto& rec : res.monitors) EXPECT_EQ(rec.u_drift, 0.0);
}

TEST(Run, ConstantDataOracles) {
  EXPECT_DOUBLE_EQ(constant_data_oracle(2.0, 1.0, 0.0, 0.0, 1.0), std::sqrt(6.0));
  EXPECT_DOUBLE_EQ(constant_data_oracle(1.0, 1.0, 0.3, 0.4, 0.5), 1.5);
  EXPECT_THROW(constant_data_oracle(0.1, 1.0, 0.3, 0.4, 0.5), InvalidArgument);

  FlowOptions opt;
  opt.t_end = 1.0;
  RunResult res = run(HermitianMetricField::constant(GridSpec(32), 2.0, 1.0), opt);
  EXPECT_EQ(res.final_state.t, 1.0);
  EXPECT_LE(std::abs(res.final_state.metric.r()[0] - std::sqrt(6.0)), 1e-8);
  EXPECT_EQ(spatial_stats(res.final_state.metric.r()).std, 0.0);

  opt.t_end = 0.5;
  res = run(HermitianMetricField::constant(GridSpec(16), 1.0, 1.0, 0.3, 0.4), opt);
  EXPECT_LE(std::abs(res.final_state.metric.r()[0] - 1.5), 1e-8);
  for (const auto& rec : res.monitors) {
    EXPECT_EQ(rec.h3_std, 0.0);
    EXPECT_EQ(rec.h4_std, 0.0);
  }
}

TEST(Run, OracleMatchesBruteForceIntegration) {
  for (auto [r0, s, a, b, t] : {std::tuple{2.0, 1.0, 0.0, 0.0, 1.0}, std::tuple{1.0, 1.0, 0.3, 0.4, 0.5},
                                std::tuple{3.0, 0.7, -0.5, 0.2, 2.0}}) {
    EXPECT_NEAR(constant_data_oracle(r0, s, a, b, t), brute_force_r(r0, s, a * a + b * b, t, 20000),
                1e-12);
  }
}

TEST(Run, RichardsonRatioWithFixedStep) {
  const auto m = HermitianMetricField::constant(GridSpec(8), 2.0, 1.0);
  double errs[2];
  int i = 0;
  for (double dt : {0.1, 0.05}) {
    FlowOptions opt;
    opt.fixed_dt = dt;
    const RunResult res = run(m, opt);
    errs[i++] = std::abs(res.final_state.metric.r()[0] - std::sqrt(6.0));
  }
  EXPECT_GE(errs[0] / errs[1], 14.0);
  EXPECT_LE(errs[0] / errs[1], 18.0);
}

TEST(Run, DeterministicMonitors) {
  const auto m = type_two_deform(one_mode_profile(GridSpec(16), 0.005).f).metric;
  FlowOptions opt;
  opt.t_end = 0.01;
  opt.monitor_every = 5;
  const RunResult a = run(m, opt), b = run(m, opt);
  ASSERT_EQ(a.monitors.size(), b.monitors.size());
  for (std::size_t i = 0; i < a.monitors.size(); ++i) {
    const auto va = monitor_values(a.monitors[i]), vb = monitor_values(b.monitors[i]);
    for (std::size_t j = 0; j < va.size(); ++j) EXPECT_EQ(va[j], vb[j]);
  }
  EXPECT_EQ(max_abs_diff(a.final_state.metric.r(), b.final_state.metric.r()), 0.0);
}

TEST(Run, MonitorScheduleAndSnapshotLanding) {
  FlowOptions opt;
  opt.t_end = 0.2;
  opt.monitor_every = 3;
  opt.fixed_dt = 0.03;
  opt.snapshot_times = {0.1234, 0.05, 0.05, 0.2};
  std::vector<double> snaps;
  RunCallbacks cb;
  cb.on_snapshot = [&](const FlowState& st) { snaps.push_back(st.t); };
  const RunResult res = run(HermitianMetricField::standard(GridSpec(8)), opt, cb);
  EXPECT_EQ(snaps, (std::vector<double>{0.05, 0.1234, 0.2}));
  EXPECT_EQ(res.final_state.t, 0.2);
  EXPECT_EQ(res.monitors.front().t, 0.0);
  EXPECT_EQ(res.monitors.back().t, 0.2);
  for (std::size_t i = 1; i + 1 < res.monitors.size(); ++i) EXPECT_GT(res.monitors[i].t, res.monitors[i - 1].t);
}

TEST(Run, PositivityFailureKeepsLastGoodState) {
  // Under the bismut variant constant data has F' = -s^3 / F, which hits
  // zero at t = F0^2 / (2 s^3) = 0.5 for the standard metric.
  FlowOptions opt;
  opt.variant = RhsVariant::bismut;
  opt.fixed_dt = 0.1;
  const RunResult res = run(HermitianMetricField::standard(GridSpec(8)), opt);
  EXPECT_EQ(res.termination, Termination::positivity_failure);
  EXPECT_NEAR(res.final_state.t, 0.5, 0.02);
  EXPECT_GT(spatial_stats(det_function(res.final_state.metric)).min, 0.0);
  EXPECT_NE(res.message.find("failure"), std::string::npos);
  EXPECT_EQ(res.monitors.back().t, res.final_state.t);
}

TEST(FlowOptions, Validation) {
  FlowOptions o;
  o.t_end = -1.0;
  EXPECT_THROW(validate(o), ConfigError);
  o = {};
  o.safety = 0.0;
  EXPECT_THROW(validate(o), ConfigError);
  o = {};
  o.monitor_every = 0;
  EXPECT_THROW(validate(o), ConfigError);
  o = {};
  o.fixed_dt = -0.1;
  EXPECT_THROW(validate(o), ConfigError);
  EXPECT_NO_THROW(validate(FlowOptions{}));
}

TEST(Drift, ZeroProfileIsPreserved) {
  const DriftReport rep = vaisman_drift_experiment(ScalarField(GridSpec(16)), 0.05, RhsVariant::newsystem);
  EXPECT_TRUE(rep.preserved_within_tol);
  EXPECT_LE(std::abs(rep.drift_rate), 1e-10);
  EXPECT_EQ(rep.termination, Termination::reached_t_end);
  EXPECT_EQ(rep.t_final, 0.05);
}

TEST(Drift, OneModeReportsFiniteDrift) {
  for (auto v : {RhsVariant::newsystem, RhsVariant::bismut}) {
    const DriftReport rep = vaisman_drift_experiment(one_mode_profile(GridSpec(16), 0.005).f, 0.02, v);
    EXPECT_TRUE(std::isfinite(rep.drift_rate));
    EXPECT_TRUE(std::isfinite(rep.max_h3_rel_std));
    EXPECT_GE(rep.records, 2u);
    EXPECT_EQ(rep.variant, v);
  }
}

TEST(Drift, EarlySlope) {
  std::vector<MonitorRecord> recs(8);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].t = 0.1 * i;
    recs[i].h3_std = 3.0 * recs[i].t + (i >= 2 ? 100.0 : 0.0);  // only the first two count
  }
  EXPECT_NEAR(early_slope(recs, &MonitorRecord::h3_std), 3.0, 1e-12);
  EXPECT_EQ(early_slope({}, &MonitorRecord::h3_std), 0.0);
}
