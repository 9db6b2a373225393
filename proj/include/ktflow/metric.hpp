#pragma once

// T^2-invariant Hermitian metrics on the Kodaira-Thurston surface:
//   omega = r e12 + s e34 + u1 (e13 + e24) + u2 (e14 - e23)
// with r, s > 0 and F = r s - u1^2 - u2^2 > 0.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "ktflow/error.hpp"
#include "ktflow/forms.hpp"
#include "ktflow/grid.hpp"

namespace ktflow {

namespace detail {

/// Description of the first grid point where (r, s, F) fail positivity.
inline std::optional<std::string> positivity_violation(const ScalarField& r, const ScalarField& s,
                                                       const ScalarField& u1,
                                                       const ScalarField& u2) {
  const GridSpec g = r.spec();
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix) {
      const std::size_t k = g.index(ix, iy);
      const double F = r[k] * s[k] - u1[k] * u1[k] - u2[k] * u2[k];
      const char* what = nullptr;
      if (!std::isfinite(r[k]) || !std::isfinite(s[k]) || !std::isfinite(u1[k]) ||
          !std::isfinite(u2[k]))
        what = "non-finite coefficient";
      else if (!(r[k] > 0.0))
        what = "r <= 0";
      else if (!(s[k] > 0.0))
        what = "s <= 0";
      else if (!(F > 0.0))
        what = "rs - |u|^2 <= 0";
      if (what != nullptr) {
        std::ostringstream os;
        os.precision(17);
        os << what << " at (ix=" << ix << ", iy=" << iy << "): r=" << r[k] << " s=" << s[k]
           << " u1=" << u1[k] << " u2=" << u2[k] << " F=" << F;
        return os.str();
      }
    }
  return std::nullopt;
}

}  // namespace detail

class HermitianMetricField {
 public:
  /// Throws PositivityError at the first grid point violating the invariants.
  HermitianMetricField(ScalarField r, ScalarField s, ScalarField u1, ScalarField u2)
      : r_(std::move(r)), s_(std::move(s)), u1_(std::move(u1)), u2_(std::move(u2)) {
    if (!(s_.spec() == r_.spec()) || !(u1_.spec() == r_.spec()) || !(u2_.spec() == r_.spec()))
      throw InvalidArgument("metric coefficients live on different grids");
    if (auto v = detail::positivity_violation(r_, s_, u1_, u2_))
      throw PositivityError("metric not positive: " + *v);
  }

  /// Left-invariant metric with constant coefficients.
  static HermitianMetricField constant(GridSpec g, double r, double s, double u1 = 0.0,
                                       double u2 = 0.0) {
    return {ScalarField(g, r), ScalarField(g, s), ScalarField(g, u1), ScalarField(g, u2)};
  }

  /// omega = e12 + e34.
  static HermitianMetricField standard(GridSpec g) { return constant(g, 1.0, 1.0); }

  const GridSpec& spec() const noexcept { return r_.spec(); }
  const ScalarField& r() const noexcept { return r_; }
  const ScalarField& s() const noexcept { return s_; }
  const ScalarField& u1() const noexcept { return u1_; }
  const ScalarField& u2() const noexcept { return u2_; }

 private:
  ScalarField r_, s_, u1_, u2_;
};

/// Frame components g(e_i, e_j), i, j = 1..4, at one grid point (row-major).
inline std::array<double, 16> metric_matrix(const HermitianMetricField& m, std::size_t k) {
  const double r = m.r()[k], s = m.s()[k], a = m.u1()[k], b = m.u2()[k];
  return {r, 0.0, b, -a,  //
          0.0, r, a, b,   //
          b, a, s, 0.0,   //
          -a, b, 0.0, s};
}

inline KForm fundamental_form(const HermitianMetricField& m) {
  return KForm(2, {m.r(), m.u1(), m.u2(), -m.u2(), m.u1(), m.s()});
}

/// Inverse of fundamental_form on the family. The e13/e24 and e14/-e23
/// coefficient pairs must agree to `shape_tol`.
inline HermitianMetricField metric_from_two_form(const KForm& beta, double shape_tol = 1e-10) {
  if (beta.degree() != 2) throw InvalidArgument("metric_from_two_form needs a 2-form");
  const double d13 = max_abs_diff(beta.coeff("13"), beta.coeff("24"));
  const double d14 = max_abs_diff(beta.coeff("14"), -beta.coeff("23"));
  if (d13 > shape_tol || d14 > shape_tol) {
    std::ostringstream os;
    os << "not J-compatible in family: |c13 - c24| = " << d13 << ", |c14 + c23| = " << d14;
    throw ShapeError(os.str());
  }
  ScalarField u1 = 0.5 * (beta.coeff("13") + beta.coeff("24"));
  ScalarField u2 = 0.5 * (beta.coeff("14") - beta.coeff("23"));
  if (auto v = detail::positivity_violation(beta.coeff("12"), beta.coeff("34"), u1, u2))
    throw PositivityError("not positive: " + *v);
  return {beta.coeff("12"), beta.coeff("34"), std::move(u1), std::move(u2)};
}

/// F = r s - |u|^2, the determinant of the Hermitian coefficient matrix.
inline ScalarField det_function(const HermitianMetricField& m) {
  return m.r() * m.s() - m.u1() * m.u1() - m.u2() * m.u2();
}

struct PluriclosedCheck {
  double residual = 0.0;
  double tolerance = 0.0;
  bool is_pluriclosed = false;
};

/// Pluriclosed iff s is constant; residual = max(|lap s|, |s - mean s|).
/// Default tolerance 1e-9 (1 + max|s|).
inline PluriclosedCheck pluriclosed_residual(const HermitianMetricField& m,
                                             std::optional<double> tol = std::nullopt) {
  PluriclosedCheck c;
  const FieldStats st = spatial_stats(m.s());
  const double dev = std::max(std::abs(st.max - st.mean), std::abs(st.min - st.mean));
  c.residual = std::max(laplacian(m.s()).max_abs(), dev);
  c.tolerance = tol.value_or(1e-9 * (1.0 + m.s().max_abs()));
  c.is_pluriclosed = c.residual <= c.tolerance;
  return c;
}

/// Pointwise g^{-1}(theta, theta). Uses the block inverse of the frame metric
/// [[r I, U], [U^T, s I]] with U = [[u2, -u1], [u1, u2]], U U^T = |u|^2 I.
inline ScalarField one_form_norm_squared(const HermitianMetricField& m, const KForm& theta) {
  if (theta.degree() != 1) throw InvalidArgument("norm of a non-1-form");
  const ScalarField F = det_function(m);
  const GridSpec g = m.spec();
  ScalarField out(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double h1 = theta[0][k], h2 = theta[1][k], h3 = theta[2][k], h4 = theta[3][k];
    const double a = m.u1()[k], b = m.u2()[k];
    // (h1, h2) . U (h3, h4)
    const double cross = h1 * (b * h3 - a * h4) + h2 * (a * h3 + b * h4);
    out[k] = (m.s()[k] * (h1 * h1 + h2 * h2) + m.r()[k] * (h3 * h3 + h4 * h4) - 2.0 * cross) / F[k];
  }
  return out;
}

}  // namespace ktflow
