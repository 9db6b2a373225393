#pragma once

// Lee form, Chern and Bismut Ricci forms, Bismut torsion and the Vaisman
// classifier for the T^2-invariant family.

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ktflow/complex_frame.hpp"
#include "ktflow/error.hpp"
#include "ktflow/forms.hpp"
#include "ktflow/grid.hpp"
#include "ktflow/metric.hpp"

namespace ktflow {

/// Coframe components of the Lee form theta = h1 e1 + h2 e2 + h3 e3 + h4 e4.
struct LeeData {
  ScalarField h1, h2, h3, h4;
  FieldStats h3_stats, h4_stats;
  double residual = 0.0;  // max |d omega - theta ^ omega|, NaN when not computed

  KForm one_form() const { return KForm(1, {h1, h2, h3, h4}); }
};

/// Solves d omega = theta ^ omega pointwise in closed form. With c = s_y,
/// d = s_x (both zero for pluriclosed metrics):
///   h3 = (s a + u2 c + u1 d) / F,  a = -s - (u1)_x - (u2)_y
///   h4 = (s b - u1 c + u2 d) / F,  b = (u1)_y - (u2)_x
///   h1 = (c + u2 h3 - u1 h4) / s,  h2 = (d + u1 h3 + u2 h4) / s
inline LeeData lee_form(const HermitianMetricField& m, bool with_residual = true) {
  const GridSpec g = m.spec();
  const Gradient du1 = gradient(m.u1());
  const Gradient du2 = gradient(m.u2());
  const Gradient ds = gradient(m.s());
  const ScalarField F = det_function(m);
  LeeData lee{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g), {}, {}, std::nan("")};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double s = m.s()[k], u1 = m.u1()[k], u2 = m.u2()[k];
    const double a = -s - du1.dx[k] - du2.dy[k];
    const double b = du1.dy[k] - du2.dx[k];
    const double c = ds.dy[k], d = ds.dx[k];
    const double h3 = (s * a + u2 * c + u1 * d) / F[k];
    const double h4 = (s * b - u1 * c + u2 * d) / F[k];
    lee.h3[k] = h3;
    lee.h4[k] = h4;
    lee.h1[k] = (c + u2 * h3 - u1 * h4) / s;
    lee.h2[k] = (d + u1 * h3 + u2 * h4) / s;
  }
  lee.h3_stats = spatial_stats(lee.h3);
  lee.h4_stats = spatial_stats(lee.h4);
  if (with_residual) {
    const KForm omega = fundamental_form(m);
    lee.residual = max_abs_diff(exterior_derivative(omega), wedge(lee.one_form(), omega));
  }
  return lee;
}

/// Frame components of the metric dual T of theta, i.e. g(T, e_i) = h_i.
inline std::array<ScalarField, 4> lee_vector_field(const HermitianMetricField& m,
                                                   const LeeData& lee) {
  const GridSpec g = m.spec();
  const ScalarField F = det_function(m);
  std::array<ScalarField, 4> t{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = m.r()[k], s = m.s()[k], u1 = m.u1()[k], u2 = m.u2()[k];
    const double h1 = lee.h1[k], h2 = lee.h2[k], h3 = lee.h3[k], h4 = lee.h4[k];
    t[0][k] = (s * h1 - u2 * h3 + u1 * h4) / F[k];
    t[1][k] = (s * h2 - u1 * h3 - u2 * h4) / F[k];
    t[2][k] = (r * h3 - u2 * h1 - u1 * h2) / F[k];
    t[3][k] = (r * h4 + u1 * h1 - u2 * h2) / F[k];
  }
  return t;
}

/// rho^C = -1/2 lap(log F) e12.
inline KForm chern_ricci(const HermitianMetricField& m) {
  const ScalarField logF = map(det_function(m), [](double v) { return std::log(v); });
  return KForm::basis_element("12", -0.5 * laplacian(logF));
}

struct DJTheta {
  KForm full;
  KForm one_one;
};

inline DJTheta dj_theta(const LeeData& lee) {
  KForm full = exterior_derivative(apply_j(lee.one_form()));
  KForm oo = project_one_one(full);
  return {std::move(full), std::move(oo)};
}

enum class RicciRoute { formula, relation };

namespace detail {

inline void require_pluriclosed(const HermitianMetricField& m, const char* what) {
  const auto pc = pluriclosed_residual(m);
  if (!pc.is_pluriclosed)
    throw NotPluriclosed(std::string(what) + " requires a pluriclosed metric (s constant); residual " +
                         std::to_string(pc.residual));
}

/// Closed-form (1,1)-part of the Bismut Ricci form, assembled in the complex
/// frame and converted to the real basis:
///   c (i/2) phi^{1 1bar} - (A + iB) phi^{1 2bar} + (A - iB) phi^{2 1bar}
/// with c = -1/2 lap log F - (h1)_y - (h2)_x - h3,
///      A = -(h3)_x/4 + (h4)_y/4,  B = (h3)_y/4 + (h4)_x/4.
inline KForm bismut_ricci_formula(const HermitianMetricField& m, const LeeData& lee) {
  using namespace complex_frame;
  const GridSpec g = m.spec();
  const ScalarField logF = map(det_function(m), [](double v) { return std::log(v); });
  const ScalarField lapLogF = laplacian(logF);
  const Gradient d1 = gradient(lee.h1), d2 = gradient(lee.h2);
  const Gradient d3 = gradient(lee.h3), d4 = gradient(lee.h4);
  const Coeffs p11 = to_real(Pair::p11bar), p12 = to_real(Pair::p12bar),
               p21 = to_real(Pair::p21bar);
  KForm out(2, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double c = -0.5 * lapLogF[k] - d1.dy[k] - d2.dx[k] - lee.h3[k];
    const double A = -0.25 * d3.dx[k] + 0.25 * d4.dy[k];
    const double B = 0.25 * d3.dy[k] + 0.25 * d4.dx[k];
    const std::complex<double> z11 = 0.5 * I * c, z12 = -(A + I * B), z21 = A - I * B;
    for (std::size_t b = 0; b < 6; ++b)
      out[b][k] = (z11 * p11[b] + z12 * p12[b] + z21 * p21[b]).real();
  }
  return out;
}

}  // namespace detail

/// (rho^B)^{1,1} by the closed-form route or via rho^C - (d J theta)^{1,1}.
inline KForm bismut_ricci_11(const HermitianMetricField& m, RicciRoute route,
                             const std::optional<LeeData>& lee_in = std::nullopt) {
  detail::require_pluriclosed(m, "Bismut Ricci form");
  const LeeData lee = lee_in ? *lee_in : lee_form(m, false);
  if (route == RicciRoute::formula) return detail::bismut_ricci_formula(m, lee);
  return chern_ricci(m) - dj_theta(lee).one_one;
}

/// Global sign of T^B = sign * J(d omega), pinned by T^B = -*theta for
/// omega = e12 + e34 (theta = -e3, *e3 = e124).
inline constexpr double kTorsionSign = -1.0;

/// T^B = d^c omega = -J^{-1} d J omega; on this family J omega = omega and
/// J^{-1} = -J on 3-forms.
inline KForm bismut_torsion(const HermitianMetricField& m) {
  KForm t = apply_j(exterior_derivative(fundamental_form(m)));
  t *= kTorsionSign;
  return t;
}

struct VaismanReport {
  bool pluriclosed = false;
  bool is_lck = false;
  bool is_vaisman = false;
  FieldStats h3_stats, h4_stats;
  double lee_residual = 0.0;
  double dtheta_norm = 0.0;
  double tolerance = 0.0;
  std::string reason;
};

/// Vaisman iff h3 and h4 are spatially constant (relative std test);
/// LCK decided independently from |d theta| <= tol (1 + |theta|).
inline VaismanReport vaisman_classify(const HermitianMetricField& m, double tol = 1e-9) {
  VaismanReport rep;
  rep.tolerance = tol;
  const LeeData lee = lee_form(m);
  rep.h3_stats = lee.h3_stats;
  rep.h4_stats = lee.h4_stats;
  rep.lee_residual = lee.residual;
  const KForm theta = lee.one_form();
  rep.dtheta_norm = exterior_derivative(theta).max_abs();
  rep.pluriclosed = pluriclosed_residual(m).is_pluriclosed;
  if (!rep.pluriclosed) {
    rep.reason = "not pluriclosed (s is not constant)";
    return rep;
  }
  rep.is_vaisman = rep.h3_stats.std <= tol * (1.0 + std::abs(rep.h3_stats.mean)) &&
                   rep.h4_stats.std <= tol * (1.0 + std::abs(rep.h4_stats.mean));
  rep.is_lck = rep.dtheta_norm <= tol * (1.0 + theta.max_abs());
  if (!rep.is_vaisman) rep.reason = "h3 or h4 not constant";
  return rep;
}

struct HFactor {
  ScalarField field;        // 0 at masked points
  std::vector<char> mask;   // 1 where the ratio is defined
  std::size_t masked_points = 0;
  FieldStats stats;         // over unmasked points
};

/// h with rho^C = h d(J theta), from the ratio of e12 coefficients where
/// |d(J theta)_12| > mask_threshold.
inline HFactor h_conformal_factor(const HermitianMetricField& m, double mask_threshold = 1e-8) {
  const GridSpec g = m.spec();
  const ScalarField num = chern_ricci(m).coeff("12");
  const ScalarField den = dj_theta(lee_form(m, false)).full.coeff("12");
  HFactor h{ScalarField(g), std::vector<char>(g.size(), 0), 0, {}};
  std::vector<double> kept;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (std::abs(den[k]) > mask_threshold) {
      h.field[k] = num[k] / den[k];
      h.mask[k] = 1;
      kept.push_back(h.field[k]);
    } else {
      ++h.masked_points;
    }
  }
  if (kept.empty()) throw InvalidArgument("denominator vanishes everywhere");
  // Stats over the unmasked samples, in storage order.
  const auto [mn, mx] = std::minmax_element(kept.begin(), kept.end());
  h.stats.min = *mn;
  h.stats.max = *mx;
  if (*mn == *mx) {
    h.stats.mean = *mn;
  } else {
    double sum = 0.0;
    for (double v : kept) sum += v;
    h.stats.mean = sum / static_cast<double>(kept.size());
    double sq = 0.0;
    for (double v : kept) sq += (v - h.stats.mean) * (v - h.stats.mean);
    h.stats.std = std::sqrt(sq / static_cast<double>(kept.size()));
  }
  return h;
}

/// Everything reported by the `analyze` command.
struct AnalysisReport {
  bool pluriclosed = false;
  bool lck = false;
  bool vaisman = false;
  FieldStats h3, h4;
  double lee_residual = 0.0;
  std::optional<double> ricci_xcheck_residual;  // only for pluriclosed metrics
  struct HSummary {
    double mean = 0.0, std = 0.0;
    std::size_t masked_points = 0;
  };
  std::optional<HSummary> h_factor;  // only for Vaisman metrics
};

inline AnalysisReport analyze_metric(const HermitianMetricField& m, double tol = 1e-9) {
  AnalysisReport a;
  const VaismanReport v = vaisman_classify(m, tol);
  a.pluriclosed = v.pluriclosed;
  a.lck = v.is_lck;
  a.vaisman = v.is_vaisman;
  a.h3 = v.h3_stats;
  a.h4 = v.h4_stats;
  a.lee_residual = v.lee_residual;
  if (a.pluriclosed) {
    const LeeData lee = lee_form(m, false);
    a.ricci_xcheck_residual = max_abs_diff(bismut_ricci_11(m, RicciRoute::formula, lee),
                                           bismut_ricci_11(m, RicciRoute::relation, lee));
  }
  if (a.vaisman) {
    try {
      const HFactor h = h_conformal_factor(m);
      a.h_factor = AnalysisReport::HSummary{h.stats.mean, h.stats.std, h.masked_points};
    } catch (const InvalidArgument&) {
      // d(J theta) vanishes everywhere: no conformal factor to report.
    }
  }
  return a;
}

}  // namespace ktflow
