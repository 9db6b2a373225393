#pragma once

// Self-test suite behind `ktflow verify`: exterior calculus identities, Lee
// residual, Ricci route agreement, the reduced r-identity, flow oracles and
// the construction checks, each reported as one named check.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ktflow/deform.hpp"
#include "ktflow/ensemble.hpp"
#include "ktflow/flow.hpp"
#include "ktflow/forms.hpp"
#include "ktflow/geometry.hpp"
#include "ktflow/io.hpp"
#include "ktflow/metric.hpp"

namespace ktflow::verify {

struct Options {
  int n = 64;
  double tol = 1e-8;          // route agreement, identity and variant gap
  bool flip_dj_theta = false; // mutation fixture: use rho^C + (dJtheta)^{1,1}
  int ensemble_size = 20;
  int random_forms = 500;
  std::uint64_t seed = 20240917;
};

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
};

struct Summary {
  std::vector<Check> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Pointwise differences between two 2-forms of the family shape, split into
/// the e12 part, the (e13 + e24) and (e14 - e23) parts, and the remainder
/// outside the family.
struct ComponentGap {
  double e12 = 0.0, e13_e24 = 0.0, e14_e23 = 0.0, off_family = 0.0;
};

inline ComponentGap component_gap(const KForm& a, const KForm& b) {
  const KForm d = a - b;
  ComponentGap g;
  for (std::size_t k = 0; k < d.spec().size(); ++k) {
    const double c12 = d[0][k], c13 = d[1][k], c14 = d[2][k], c23 = d[3][k], c24 = d[4][k],
                 c34 = d[5][k];
    g.e12 = std::max(g.e12, std::abs(c12));
    g.e13_e24 = std::max(g.e13_e24, std::abs(0.5 * (c13 + c24)));
    g.e14_e23 = std::max(g.e14_e23, std::abs(0.5 * (c14 - c23)));
    g.off_family = std::max({g.off_family, std::abs(0.5 * (c13 - c24)),
                             std::abs(0.5 * (c14 + c23)), std::abs(c34)});
  }
  return g;
}

/// max over the grid of |(h1)_y + (h2)_x + h3 + (h3^2 + h4^2) F / s^2
///   - (1/s) [u1 (-(h3)_x + (h4)_y) + u2 ((h3)_y + (h4)_x)]|
inline double reduced_identity_residual(const HermitianMetricField& m) {
  const LeeData lee = lee_form(m, false);
  const Gradient d3 = gradient(lee.h3), d4 = gradient(lee.h4);
  const ScalarField h1y = partial_derivative(lee.h1, Axis::y);
  const ScalarField h2x = partial_derivative(lee.h2, Axis::x);
  const ScalarField F = det_function(m);
  double worst = 0.0;
  for (std::size_t k = 0; k < F.size(); ++k) {
    const double s = m.s()[k], u1 = m.u1()[k], u2 = m.u2()[k];
    const double h3 = lee.h3[k], h4 = lee.h4[k];
    const double lhs = h1y[k] + h2x[k] + h3 + (h3 * h3 + h4 * h4) * F[k] / (s * s);
    const double rhs = (u1 * (-d3.dx[k] + d4.dy[k]) + u2 * (d3.dy[k] + d4.dx[k])) / s;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// max |rDot(newsystem) - rDot(bismut) - (2/s^2)(h3^2 + h4^2) F|
inline double variant_gap_residual(const HermitianMetricField& m) {
  const LeeData lee = lee_form(m, false);
  const FlowRhs a = flow_rhs(m, RhsVariant::newsystem);
  const FlowRhs b = flow_rhs(m, RhsVariant::bismut);
  const ScalarField F = det_function(m);
  double worst = 0.0;
  for (std::size_t k = 0; k < F.size(); ++k) {
    const double s = m.s()[k];
    const double q = 2.0 * (lee.h3[k] * lee.h3[k] + lee.h4[k] * lee.h4[k]) * F[k] / (s * s);
    worst = std::max(worst, std::abs(a.r_dot[k] - b.r_dot[k] - q));
  }
  return worst;
}

/// max over degrees 0..2 and `count` random forms of |d d phi|.
inline double d_squared_residual(GridSpec g, int count, std::mt19937_64& rng) {
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const KForm phi = ensemble::random_form(g, i % 3, rng);
    worst = std::max(worst, exterior_derivative(exterior_derivative(phi)).max_abs());
  }
  return worst;
}

/// max |d(a ^ b) - da ^ b - (-1)^p a ^ db| / (1 + |a| |b|) over random pairs.
inline double leibniz_residual(GridSpec g, int count, std::mt19937_64& rng) {
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const int p = i % 3, q = (i / 3) % (4 - p);  // p + q <= 3
    const KForm a = ensemble::random_form(g, p, rng);
    const KForm b = ensemble::random_form(g, q, rng);
    KForm rhs = wedge(exterior_derivative(a), b);
    KForm second = wedge(a, exterior_derivative(b));
    if (p % 2) second *= -1.0;
    rhs += second;
    const double scale = 1.0 + a.max_abs() * b.max_abs();
    worst = std::max(worst, max_abs_diff(exterior_derivative(wedge(a, b)), rhs) / scale);
  }
  return worst;
}

inline Summary run(const Options& opt) {
  Summary out;
  auto add = [&](std::string name, double value, double tol, bool pass_if_below = true) {
    const bool ok = std::isfinite(value) && (pass_if_below ? value <= tol : value >= tol);
    out.checks.push_back({std::move(name), ok, value, tol});
  };
  const GridSpec g(opt.n);
  std::mt19937_64 rng(opt.seed);

  add("d_squared_zero", d_squared_residual(g, opt.random_forms, rng), 1e-10);
  add("leibniz", leibniz_residual(g, 60, rng), 1e-10);

  const auto ens = ensemble::random_pluriclosed_ensemble(g, opt.ensemble_size, opt.seed);
  double lee_res = 0.0, identity = 0.0, gap = 0.0;
  ComponentGap routes;
  for (const auto& m : ens) {
    const LeeData lee = lee_form(m);
    lee_res = std::max(lee_res, lee.residual / (1.0 + fundamental_form(m).max_abs()));
    const KForm formula = bismut_ricci_11(m, RicciRoute::formula, lee);
    KForm dj = dj_theta(lee).one_one;
    if (opt.flip_dj_theta) dj *= -1.0;
    const ComponentGap cg = component_gap(formula, chern_ricci(m) - dj);
    routes.e12 = std::max(routes.e12, cg.e12);
    routes.e13_e24 = std::max({routes.e13_e24, cg.e13_e24, cg.off_family});
    routes.e14_e23 = std::max({routes.e14_e23, cg.e14_e23, cg.off_family});
    identity = std::max(identity, reduced_identity_residual(m));
    gap = std::max(gap, variant_gap_residual(m));
  }
  add("lee_residual", lee_res, 1e-9);
  add("ricci_routes_e12", routes.e12, opt.tol);
  add("ricci_routes_e13_e24", routes.e13_e24, opt.tol);
  add("ricci_routes_e14_e23", routes.e14_e23, opt.tol);
  add("reduced_identity", identity, opt.tol);
  add("rhs_variant_gap", gap, opt.tol);

  {
    const HermitianMetricField m = HermitianMetricField::standard(g);
    const LeeData lee = lee_form(m);
    double err = std::max({lee.h1.max_abs(), lee.h2.max_abs(), lee.h4.max_abs(),
                           (lee.h3 + 1.0).max_abs()});
    add("lee_standard_metric", err, 1e-14);
  }
  {
    FlowOptions fo;
    fo.t_end = 1.0;
    const RunResult r = ktflow::run(HermitianMetricField::constant(GridSpec(8), 2.0, 1.0), fo);
    add("constant_data_oracle", std::abs(r.final_state.metric.r()[0] - std::sqrt(6.0)), 1e-8);
    add("constant_data_closed_form",
        std::abs(constant_data_oracle(1.0, 1.0, 0.3, 0.4, 0.5) - 1.5), 1e-14);
  }
  {
    const ScalarField s = ScalarField::sample(g, [](double, double y) {
      return 1.0 + 0.1 * std::cos(2.0 * std::numbers::pi * y);
    });
    const HermitianMetricField bad(ScalarField(g, 2.0), s, ScalarField(g), ScalarField(g));
    add("pluriclosed_detector_rejects", pluriclosed_residual(bad).residual, 0.1, false);
    double worst = 0.0;
    for (const auto& m : ens) worst = std::max(worst, pluriclosed_residual(m).residual);
    add("pluriclosed_detector_accepts", worst, 1e-12);
  }
  {
    const DeformProfile p = two_mode_profile(g, 0.005);
    const Deformation d = type_two_deform(p.f);
    add("type_two_closed_form", max_abs_diff(fundamental_form(d.metric), type_two_closed_form(p.f)),
        1e-12);
  }
  return out;
}

inline io::Json summary_json(const Summary& s, const Options& opt) {
  io::Json j;
  j["n"] = opt.n;
  j["tol"] = opt.tol;
  j["flip_dj_theta"] = opt.flip_dj_theta;
  j["passed"] = s.all_passed();
  io::Json checks = io::Json::array();
  for (const auto& c : s.checks) {
    io::Json e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    e["value"] = c.value;
    e["tolerance"] = c.tolerance;
    checks.push_back(e);
  }
  j["checks"] = checks;
  return j;
}

}  // namespace ktflow::verify
