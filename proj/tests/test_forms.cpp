#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "ktflow/complex_frame.hpp"
#include "ktflow/ensemble.hpp"
#include "ktflow/forms.hpp"

using namespace ktflow;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

ScalarField constant(GridSpec g, double c) { return ScalarField(g, c); }

KForm one(const char* label, GridSpec g, double c = 1.0) {
  return KForm::basis_element(label, g, c);
}
}  // namespace

TEST(Basis, LexicographicOrder) {
  const char* two[] = {"e12", "e13", "e14", "e23", "e24", "e34"};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(basis::label(basis::masks(2)[i]), two[i]);
  const char* three[] = {"e123", "e124", "e134", "e234"};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(basis::label(basis::masks(3)[i]), three[i]);
  EXPECT_EQ(basis::label(basis::masks(4)[0]), "e1234");
  EXPECT_THROW(basis::parse("31"), InvalidArgument);
  EXPECT_THROW(basis::parse("15"), InvalidArgument);
}

TEST(KForm, DegreeChecks) {
  const GridSpec g(8);
  EXPECT_THROW(KForm(5, g), InvalidArgument);
  EXPECT_THROW(exterior_derivative(KForm(4, g)), InvalidArgument);
  EXPECT_THROW(wedge(KForm(2, g), KForm(3, g)), InvalidArgument);
  EXPECT_THROW(one("12", g) + one("1", g), InvalidArgument);
  EXPECT_THROW(project_one_one(one("1", g)), InvalidArgument);
}

TEST(ExteriorDerivative, StructureEquation) {
  const GridSpec g(8);
  EXPECT_EQ(max_abs_diff(exterior_derivative(one("4", g)), one("12", g)), 0.0);
  for (const char* e : {"1", "2", "3"}) EXPECT_TRUE(exterior_derivative(one(e, g))[0].is_zero());
  EXPECT_EQ(max_abs_diff(exterior_derivative(one("34", g)), one("123", g, -1.0)), 0.0);
  // d(e14) = -e1 ^ e12 = 0, d(e24) = -e2 ^ e12 = 0, d(e134) = e1 ^ e3 ^ e12 = 0
  EXPECT_EQ(exterior_derivative(one("14", g)).max_abs(), 0.0);
  EXPECT_EQ(exterior_derivative(one("24", g)).max_abs(), 0.0);
  EXPECT_EQ(exterior_derivative(one("234", g)).max_abs(), 0.0);
}

TEST(ExteriorDerivative, FunctionDifferential) {
  const GridSpec g(32);
  const auto f = ScalarField::sample(g, [](double x, double) { return std::cos(kTwoPi * x); });
  const KForm df = exterior_derivative(zero_form(f));
  EXPECT_TRUE(df.coeff("1").max_abs() < 1e-12);
  EXPECT_LE(max_abs_diff(df.coeff("2"), ScalarField::sample(g, [](double x, double) {
                           return -kTwoPi * std::sin(kTwoPi * x);
                         })),
            1e-12);
  // dh = h_y e1 + h_x e2
  const auto h = ScalarField::sample(g, [](double, double y) { return std::sin(kTwoPi * y); });
  EXPECT_LE(max_abs_diff(exterior_derivative(zero_form(h)).coeff("1"),
                         partial_derivative(h, Axis::y)),
            0.0);
}

TEST(ExteriorDerivative, DSquaredVanishesOnRandomForms) {
  const GridSpec g(32);
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const KForm phi = ensemble::random_form(g, i % 3, rng);
    worst = std::max(worst, exterior_derivative(exterior_derivative(phi)).max_abs() /
                                (1.0 + phi.max_abs()));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(ExteriorDerivative, LeibnizRule) {
  const GridSpec g(32);
  std::mt19937_64 rng(2);
  for (int p = 0; p <= 2; ++p)
    for (int q = 0; p + q <= 3; ++q) {
      const KForm a = ensemble::random_form(g, p, rng);
      const KForm b = ensemble::random_form(g, q, rng);
      KForm rhs = wedge(exterior_derivative(a), b);
      KForm second = wedge(a, exterior_derivative(b));
      if (p % 2) second *= -1.0;
      rhs += second;
      const KForm lhs = exterior_derivative(wedge(a, b));
      EXPECT_LE(max_abs_diff(lhs, rhs), 1e-10 * (1.0 + lhs.max_abs())) << p << "," << q;
    }
}

TEST(Wedge, Examples) {
  const GridSpec g(8);
  const KForm theta = one("3", g, -1.0);
  const KForm omega = one("12", g) + one("34", g);
  EXPECT_EQ(max_abs_diff(wedge(theta, omega), one("123", g, -1.0)), 0.0);
  EXPECT_EQ(wedge(one("1", g), one("1", g)).max_abs(), 0.0);
  EXPECT_EQ(max_abs_diff(wedge(one("2", g), one("1", g)), one("12", g, -1.0)), 0.0);
}

TEST(Wedge, GradedCommutativity) {
  const GridSpec g(16);
  std::mt19937_64 rng(5);
  for (int p = 0; p <= 4; ++p)
    for (int q = 0; p + q <= 4; ++q) {
      const KForm a = ensemble::random_form(g, p, rng, 3);
      const KForm b = ensemble::random_form(g, q, rng, 3);
      KForm ba = wedge(b, a);
      if ((p * q) % 2) ba *= -1.0;
      EXPECT_LE(max_abs_diff(wedge(a, b), ba), 1e-13);
    }
}

TEST(Wedge, LeeFormTimesFundamentalForm) {
  // theta ^ omega for constant coefficients, term by term:
  //   e123: -u2 h1 - u1 h2 + r h3     e134: s h1 - u2 h3 + u1 h4
  const GridSpec g(8);
  const double r = 1.3, s = 0.7, u1 = 0.2, u2 = -0.35;
  const double h1 = 0.4, h2 = -1.1, h3 = 0.6, h4 = 0.9;
  const KForm omega(2, {constant(g, r), constant(g, u1), constant(g, u2), constant(g, -u2),
                        constant(g, u1), constant(g, s)});
  const KForm theta(1, {constant(g, h1), constant(g, h2), constant(g, h3), constant(g, h4)});
  const KForm w = wedge(theta, omega);
  EXPECT_NEAR(w.coeff("123")[0], -u2 * h1 - u1 * h2 + r * h3, 1e-15);
  EXPECT_NEAR(w.coeff("134")[0], s * h1 - u2 * h3 + u1 * h4, 1e-15);
  EXPECT_NEAR(w.coeff("124")[0], u1 * h1 - u2 * h2 + r * h4, 1e-15);
  EXPECT_NEAR(w.coeff("234")[0], s * h2 - u1 * h3 - u2 * h4, 1e-15);
}

TEST(ComplexStructure, OneForms) {
  const GridSpec g(8);
  EXPECT_EQ(max_abs_diff(apply_j(one("1", g)), one("2", g)), 0.0);
  EXPECT_EQ(max_abs_diff(apply_j(one("2", g)), one("1", g, -1.0)), 0.0);
  EXPECT_EQ(max_abs_diff(apply_j(one("3", g)), one("4", g)), 0.0);
  EXPECT_EQ(max_abs_diff(apply_j(one("4", g)), one("3", g, -1.0)), 0.0);
  EXPECT_EQ(max_abs_diff(apply_j(one("3", g, -1.0)), one("4", g, -1.0)), 0.0);
  EXPECT_EQ(max_abs_diff(apply_j(one("13", g)), one("24", g)), 0.0);
}

TEST(ComplexStructure, SquareIsSignedIdentity) {
  const GridSpec g(8);
  std::mt19937_64 rng(9);
  for (int k = 1; k <= 3; ++k) {
    const KForm phi = ensemble::random_form(g, k, rng, 2);
    KForm jj = apply_j(apply_j(phi));
    if (k % 2) jj *= -1.0;
    EXPECT_EQ(max_abs_diff(jj, phi), 0.0) << k;
  }
}

TEST(ComplexStructure, TypeTwoLeeFormImage) {
  // J(-e3 + df) = -e4 + f_y e2 - f_x e1
  const GridSpec g(32);
  const auto f = ScalarField::sample(
      g, [](double x, double y) { return 0.01 * std::cos(kTwoPi * x) * std::sin(kTwoPi * y); });
  const KForm df = exterior_derivative(zero_form(f));
  const KForm j = apply_j(one("3", g, -1.0) + df);
  const Gradient gr = gradient(f);
  EXPECT_EQ(max_abs_diff(j.coeff("4"), constant(g, -1.0)), 0.0);
  EXPECT_EQ(max_abs_diff(j.coeff("2"), gr.dy), 0.0);
  EXPECT_EQ(max_abs_diff(j.coeff("1"), -gr.dx), 0.0);
}

TEST(ProjectOneOne, Examples) {
  const GridSpec g(8);
  EXPECT_EQ(max_abs_diff(project_one_one(one("12", g)), one("12", g)), 0.0);
  EXPECT_EQ(max_abs_diff(project_one_one(one("13", g)), 0.5 * (one("13", g) + one("24", g))),
            0.0);
  std::mt19937_64 rng(4);
  const KForm b = ensemble::random_form(g, 2, rng, 2);
  const KForm p = project_one_one(b);
  EXPECT_EQ(max_abs_diff(project_one_one(p), p), 0.0);
  EXPECT_EQ(max_abs_diff(apply_j(p), p), 0.0);
}

TEST(DcFunction, DDcIsLaplacianTimesE12) {
  const GridSpec g(32);
  const auto f = ScalarField::sample(g, [](double x, double) { return std::cos(kTwoPi * x); });
  const KForm dc = dc_function(f);
  EXPECT_LE(max_abs_diff(dc.coeff("1"), ScalarField::sample(g, [](double x, double) {
                           return kTwoPi * std::sin(kTwoPi * x);
                         })),
            1e-12);
  const auto two = ScalarField::sample(g, [](double x, double y) {
    return 0.005 * (std::cos(kTwoPi * x) + std::cos(kTwoPi * y));
  });
  const KForm ddc = exterior_derivative(dc_function(two));
  EXPECT_LE(max_abs_diff(ddc, KForm::basis_element("12", laplacian(two))), 1e-12);
  EXPECT_EQ(dc_function(constant(g, 2.0)).max_abs(), 0.0);
}

TEST(DJTheta, FirstPrinciplesCoefficients) {
  // d(J theta) = [(h1)_y + (h2)_x + h3] e12 + (h3)_y e14 + (h3)_x e24
  //              - (h4)_y e13 - (h4)_x e23
  const GridSpec g(32);
  std::mt19937_64 rng(8);
  const KForm theta = ensemble::random_form(g, 1, rng, 4);
  const KForm d = exterior_derivative(apply_j(theta));
  const Gradient g1 = gradient(theta[0]), g2 = gradient(theta[1]), g3 = gradient(theta[2]),
                 g4 = gradient(theta[3]);
  EXPECT_LE(max_abs_diff(d.coeff("12"), g1.dy + g2.dx + theta[2]), 1e-12);
  EXPECT_LE(max_abs_diff(d.coeff("14"), g3.dy), 1e-12);
  EXPECT_LE(max_abs_diff(d.coeff("24"), g3.dx), 1e-12);
  EXPECT_LE(max_abs_diff(d.coeff("13"), -g4.dy), 1e-12);
  EXPECT_LE(max_abs_diff(d.coeff("23"), -g4.dx), 1e-12);
  EXPECT_TRUE(d.coeff("34").is_zero());
}

namespace {
using C = std::complex<double>;
using Vec = std::array<C, 4>;

/// Real-basis coefficients of a ^ b for complex 1-forms a, b.
complex_frame::Coeffs wedge_brute(const Vec& a, const Vec& b) {
  complex_frame::Coeffs out{};
  const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (int k = 0; k < 6; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    out[k] = a[i] * b[j] - a[j] * b[i];
  }
  return out;
}
}  // namespace

TEST(ComplexFrame, ToRealMatchesBruteForceWedge) {
  using namespace complex_frame;
  const C i(0.0, 1.0);
  const Vec p1{1.0, i, 0.0, 0.0}, p2{0.0, 0.0, 1.0, i};
  const Vec q1{1.0, -i, 0.0, 0.0}, q2{0.0, 0.0, 1.0, -i};
  const std::pair<Pair, complex_frame::Coeffs> cases[] = {
      {Pair::p11bar, wedge_brute(p1, q1)}, {Pair::p22bar, wedge_brute(p2, q2)},
      {Pair::p12bar, wedge_brute(p1, q2)}, {Pair::p21bar, wedge_brute(p2, q1)},
      {Pair::p12, wedge_brute(p1, p2)},    {Pair::p1bar2bar, wedge_brute(q1, q2)}};
  for (const auto& [pair, expected] : cases) {
    const auto got = to_real(pair);
    for (int k = 0; k < 6; ++k) EXPECT_EQ(got[k], expected[k]) << static_cast<int>(pair) << " " << k;
  }
}

TEST(ComplexFrame, FromRealInvertsToReal) {
  using namespace complex_frame;
  const Pair order[] = {Pair::p11bar, Pair::p22bar, Pair::p12bar,
                        Pair::p21bar, Pair::p12,    Pair::p1bar2bar};
  for (int b = 0; b < 6; ++b) {
    const auto coeffs = from_real(b);
    Coeffs sum{};
    for (int p = 0; p < 6; ++p) {
      const auto r = to_real(order[p]);
      for (int k = 0; k < 6; ++k) sum[k] += coeffs[p] * r[k];
    }
    for (int k = 0; k < 6; ++k) EXPECT_LE(std::abs(sum[k] - (k == b ? 1.0 : 0.0)), 1e-15);
  }
}

TEST(ComplexFrame, RealProjectorAgreesWithFrameTypes) {
  // (1,1) part of each basis element = keep only 11bar, 22bar, 12bar, 21bar terms.
  using namespace complex_frame;
  const GridSpec g(8);
  const Pair order[] = {Pair::p11bar, Pair::p22bar, Pair::p12bar, Pair::p21bar};
  for (int b = 0; b < 6; ++b) {
    const auto coeffs = from_real(b);
    Coeffs sum{};
    for (int p = 0; p < 4; ++p) {
      const auto r = to_real(order[p]);
      for (int k = 0; k < 6; ++k) sum[k] += coeffs[p] * r[k];
    }
    const KForm proj = project_one_one(KForm::basis_element(basis::label(basis::masks(2)[b]), g));
    for (int k = 0; k < 6; ++k) {
      EXPECT_LE(std::abs(sum[k].imag()), 1e-15);
      EXPECT_NEAR(sum[k].real(), proj[k][0], 1e-15) << b << " " << k;
    }
  }
}
