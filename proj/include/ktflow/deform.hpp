#pragma once

// Constructors of Vaisman structures on the Kodaira-Thurston surface:
// reconstruction from the Lee form, type I deformations (rescale the Lee form
// and add a constant horizontal 1-form) and type II deformations by a
// potential f(x, y).

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "ktflow/error.hpp"
#include "ktflow/forms.hpp"
#include "ktflow/geometry.hpp"
#include "ktflow/grid.hpp"
#include "ktflow/metric.hpp"

namespace ktflow {

/// omega = (theta ^ J theta - d J theta) / |theta|^2.
inline KForm normalized_reconstruct(const KForm& theta, const HermitianMetricField& m) {
  const ScalarField norm2 = one_form_norm_squared(m, theta);
  const FieldStats st = spatial_stats(norm2);
  if (!(st.min > 1e-12))
    throw InvalidArgument("|theta|^2 vanishes (min " + std::to_string(st.min) + ")");
  const KForm jtheta = apply_j(theta);
  KForm out = wedge(theta, jtheta) - exterior_derivative(jtheta);
  return map(norm2, [](double v) { return 1.0 / v; }) * std::move(out);
}

/// A constructed Vaisman structure.
struct Deformation {
  HermitianMetricField metric;
  KForm lee;             // the Lee form assigned by the construction
  double margin = 0.0;   // min of rs - |u|^2 (type I) or of 1 - f_xx - f_yy (type II)
};

/// Type I deformation of (e12 + e34, -e3): theta~ = b theta + a1 e1 + a2 e2,
/// omega~ = theta~ ^ J theta~ - d J theta~.
inline Deformation type_one_deform(GridSpec g, double b, double a1 = 0.0, double a2 = 0.0) {
  if (!(b > 0.0)) throw InvalidArgument("type I deformation needs b > 0");
  KForm theta = KForm::basis_element("3", g, -b);
  theta += KForm::basis_element("1", g, a1);
  theta += KForm::basis_element("2", g, a2);
  const KForm jtheta = apply_j(theta);
  const KForm omega = wedge(theta, jtheta) - exterior_derivative(jtheta);
  // rs - |u|^2 = (b + |a|^2) b^2 - b^2 |a|^2 = b^3
  const ScalarField F = omega.coeff("12") * omega.coeff("34") -
                        omega.coeff("13") * omega.coeff("13") -
                        omega.coeff("14") * omega.coeff("14");
  const double margin = spatial_stats(F).min;
  if (!(margin > 0.0)) {
    std::ostringstream os;
    os << "type I deformation not positive: min(rs - |u|^2) = " << margin;
    throw PositivityError(os.str());
  }
  return {metric_from_two_form(omega), theta, margin};
}

struct DeformProfile {
  std::string name;
  double eps = 0.0;
  ScalarField f;
  double margin = 0.0;  // min over the grid of 1 - f_xx - f_yy
};

inline double admissibility_margin(const ScalarField& f) {
  return spatial_stats(1.0 - laplacian(f)).min;
}

inline DeformProfile make_profile(std::string name, double eps, ScalarField f) {
  const double margin = admissibility_margin(f);
  return {std::move(name), eps, std::move(f), margin};
}

/// f = eps cos(2 pi x)
inline DeformProfile one_mode_profile(GridSpec g, double eps) {
  return make_profile("one-mode", eps, ScalarField::sample(g, [&](double x, double) {
                        return eps * std::cos(2.0 * std::numbers::pi * x);
                      }));
}

/// f = eps (cos(2 pi x) + cos(2 pi y))
inline DeformProfile two_mode_profile(GridSpec g, double eps) {
  return make_profile("two-mode", eps, ScalarField::sample(g, [&](double x, double y) {
                        return eps * (std::cos(2.0 * std::numbers::pi * x) +
                                      std::cos(2.0 * std::numbers::pi * y));
                      }));
}

/// Closed form of the type II deformation of e12 + e34 by f:
///   (1 + f_x^2 + f_y^2 - f_xx - f_yy) e12 + e34 - f_x (e13 + e24) - f_y (e14 - e23)
inline KForm type_two_closed_form(const ScalarField& f) {
  const Gradient df = gradient(f);
  const ScalarField lap = laplacian(f);
  const ScalarField r = 1.0 + df.dx * df.dx + df.dy * df.dy - lap;
  return KForm(2, {r, -df.dx, -df.dy, df.dy, -df.dx, ScalarField(f.spec(), 1.0)});
}

/// Type II deformation of a Vaisman base (default e12 + e34):
///   omega~ = |theta|^2 omega + theta ^ J df + df ^ J theta + df ^ J df - d d^c f,
///   theta~ = theta + df.
/// Throws PositivityError when min(1 - f_xx - f_yy) <= 0 or omega~ is not
/// positive.
inline Deformation type_two_deform(const ScalarField& f,
                                   const std::optional<HermitianMetricField>& base = std::nullopt) {
  const double margin = admissibility_margin(f);
  if (!(margin > 0.0)) {
    std::ostringstream os;
    os << "inadmissible profile: min(1 - f_xx - f_yy) = " << margin;
    throw PositivityError(os.str());
  }
  const HermitianMetricField m = base ? *base : HermitianMetricField::standard(f.spec());
  const KForm theta = lee_form(m, false).one_form();
  const KForm omega = fundamental_form(m);
  const KForm df = exterior_derivative(zero_form(f));
  const KForm jdf = apply_j(df);
  KForm out = one_form_norm_squared(m, theta) * omega;
  out += wedge(theta, jdf);
  out += wedge(df, apply_j(theta));
  out += wedge(df, jdf);
  out -= exterior_derivative(dc_function(f));
  return {metric_from_two_form(out), theta + df, margin};
}

struct CurvatureExample {
  Deformation deformation;
  HFactor h;                  // ratio route rho^C / d(J theta)
  ScalarField h_closed_form;  // -1/2 lap log(1 - lap f) / (-1 + lap f)
  double route_gap = 0.0;     // max over unmasked points
  bool non_constant = false;
};

/// Builds the type II deformation of e12 + e34 by f and decides whether the
/// conformal factor h (hence the scalar curvature) is non-constant:
/// std/|mean| > 0.01, or std > 1e-3 when |mean| <= 1e-9.
inline CurvatureExample nonconstant_curvature_example(const ScalarField& f) {
  Deformation d = type_two_deform(f);
  HFactor h = h_conformal_factor(d.metric);
  const ScalarField lap = laplacian(f);
  const ScalarField lapLog = laplacian(map(1.0 - lap, [](double v) { return std::log(v); }));
  ScalarField closed = -0.5 * lapLog / (lap - 1.0);
  double gap = 0.0;
  for (std::size_t k = 0; k < closed.size(); ++k)
    if (h.mask[k]) gap = std::max(gap, std::abs(h.field[k] - closed[k]));
  const double mean = std::abs(h.stats.mean);
  const bool non_constant = mean <= 1e-9 ? h.stats.std > 1e-3 : h.stats.std / mean > 0.01;
  return {std::move(d), std::move(h), std::move(closed), gap, non_constant};
}

}  // namespace ktflow
