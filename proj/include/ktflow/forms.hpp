#pragma once

// Exterior algebra of T^2-invariant forms on the coframe e^1..e^4 of the
// Kodaira-Thurston surface, with e^1 = dy, e^2 = dx and de^4 = e^12 the only
// non-trivial structure equation. Coefficients are functions of (x, y).
//
// A basis element e^I is encoded as a 4-bit mask (bit i-1 <-> e^i). Within a
// degree, basis elements are ordered lexicographically:
//   1-forms: e1 e2 e3 e4
//   2-forms: e12 e13 e14 e23 e24 e34
//   3-forms: e123 e124 e134 e234
//   4-form : e1234

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ktflow/error.hpp"
#include "ktflow/grid.hpp"

namespace ktflow {

namespace basis {

using Mask = unsigned;

constexpr std::array<std::size_t, 5> kCount{1, 4, 6, 4, 1};

inline const std::vector<Mask>& masks(int degree) {
  static const std::array<std::vector<Mask>, 5> table = [] {
    std::array<std::vector<Mask>, 5> t;
    for (Mask m = 0; m < 16; ++m) t[std::popcount(m)].push_back(m);
    // Lexicographic order on the ascending index tuple equals ordering by
    // the reversed bit pattern.
    auto key = [](Mask m) {
      Mask r = 0;
      for (int b = 0; b < 4; ++b)
        if (m & (1u << b)) r |= 1u << (3 - b);
      return r;
    };
    for (auto& v : t)
      std::sort(v.begin(), v.end(), [&](Mask a, Mask b) { return key(a) > key(b); });
    return t;
  }();
  return table.at(static_cast<std::size_t>(degree));
}

inline std::size_t index_of(Mask m) {
  const auto& v = masks(std::popcount(m));
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), m) - v.begin());
}

/// "e13"-style label of a basis element.
inline std::string label(Mask m) {
  std::string s = "e";
  for (int b = 0; b < 4; ++b)
    if (m & (1u << b)) s += static_cast<char>('1' + b);
  return m == 0 ? "1" : s;
}

/// Parses "13" / "e13" into a mask; indices must be strictly ascending.
inline Mask parse(std::string_view s) {
  if (!s.empty() && s.front() == 'e') s.remove_prefix(1);
  Mask m = 0;
  int last = 0;
  for (char c : s) {
    const int i = c - '0';
    if (i < 1 || i > 4 || i <= last) throw InvalidArgument("bad basis label");
    m |= 1u << (i - 1);
    last = i;
  }
  return m;
}

/// Sign of e^A ^ e^B relative to e^(A|B); 0 when A and B overlap.
constexpr int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int swaps = 0;
  for (int j = 0; j < 4; ++j)
    if (b & (1u << j)) swaps += std::popcount(a >> (j + 1));
  return (swaps % 2) ? -1 : 1;
}

struct Term {
  int sign;
  Mask mask;
};

/// d(e^i): only de^4 = e^12 is non-zero.
constexpr std::array<Term, 4> kCoframeDifferential{
    Term{0, 0}, Term{0, 0}, Term{0, 0}, Term{1, 0b0011}};

/// d(e^I) expanded by the Leibniz rule; at most one term on this coframe.
inline std::vector<Term> differential(Mask m) {
  std::vector<Term> out;
  int position = 0;
  for (int j = 0; j < 4; ++j) {
    const Mask bit = 1u << j;
    if (!(m & bit)) continue;
    const Term dj = kCoframeDifferential[j];
    if (dj.sign != 0) {
      const Mask before = m & (bit - 1);
      const Mask after = m & ~((bit << 1) - 1);
      const int s1 = wedge_sign(before, dj.mask);
      const int s2 = s1 == 0 ? 0 : wedge_sign(before | dj.mask, after);
      if (s2 != 0)
        out.push_back({dj.sign * ((position % 2) ? -1 : 1) * s1 * s2,
                       before | dj.mask | after});
    }
    ++position;
  }
  return out;
}

/// J on the coframe: Je1 = e2, Je2 = -e1, Je3 = e4, Je4 = -e3.
constexpr std::array<Term, 4> kComplexStructure{
    Term{1, 0b0010}, Term{-1, 0b0001}, Term{1, 0b1000}, Term{-1, 0b0100}};

/// J(e^I) = Je^i1 ^ ... ^ Je^ik.
constexpr Term apply_j(Mask m) {
  int sign = 1;
  Mask acc = 0;
  for (int j = 0; j < 4; ++j) {
    if (!(m & (1u << j))) continue;
    const Term img = kComplexStructure[j];
    sign *= img.sign * wedge_sign(acc, img.mask);
    acc |= img.mask;
  }
  return {sign, acc};
}

}  // namespace basis

/// Differential form of fixed degree with one ScalarField per basis element.
class KForm {
 public:
  KForm(int degree, GridSpec spec) : degree_(check_degree(degree)), spec_(spec) {
    coeffs_.assign(basis::kCount[degree_], ScalarField(spec));
  }

  KForm(int degree, std::vector<ScalarField> coeffs)
      : degree_(check_degree(degree)), spec_(coeffs.empty() ? GridSpec(8) : coeffs.front().spec()) {
    if (coeffs.size() != basis::kCount[degree_])
      throw InvalidArgument("degree-" + std::to_string(degree) + " form needs " +
                            std::to_string(basis::kCount[degree_]) + " coefficients");
    for (const auto& c : coeffs)
      if (!(c.spec() == spec_)) throw InvalidArgument("grid mismatch in form coefficients");
    coeffs_ = std::move(coeffs);
  }

  /// c * e^I for a basis label such as "13".
  static KForm basis_element(std::string_view label, GridSpec spec, double c = 1.0) {
    const basis::Mask m = basis::parse(label);
    KForm f(std::popcount(m), spec);
    f.coeffs_[basis::index_of(m)] += c;
    return f;
  }

  /// f * e^I.
  static KForm basis_element(std::string_view label, const ScalarField& f) {
    const basis::Mask m = basis::parse(label);
    KForm out(std::popcount(m), f.spec());
    out.coeffs_[basis::index_of(m)] = f;
    return out;
  }

  int degree() const noexcept { return degree_; }
  const GridSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  ScalarField& operator[](std::size_t i) { return coeffs_.at(i); }
  const ScalarField& operator[](std::size_t i) const { return coeffs_.at(i); }
  ScalarField& coeff(std::string_view label) { return coeffs_.at(checked_index(label)); }
  const ScalarField& coeff(std::string_view label) const { return coeffs_.at(checked_index(label)); }
  basis::Mask mask(std::size_t i) const { return basis::masks(degree_).at(i); }

  double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, c.max_abs());
    return m;
  }

  KForm& operator+=(const KForm& o) { return zip(o, [](ScalarField& a, const ScalarField& b) { a += b; }); }
  KForm& operator-=(const KForm& o) { return zip(o, [](ScalarField& a, const ScalarField& b) { a -= b; }); }
  KForm& operator*=(double c) {
    for (auto& f : coeffs_) f *= c;
    return *this;
  }
  KForm& operator*=(const ScalarField& g) {
    for (auto& f : coeffs_) f *= g;
    return *this;
  }

 private:
  static int check_degree(int degree) {
    if (degree < 0 || degree > 4)
      throw InvalidArgument("form degree must be in [0, 4], got " + std::to_string(degree));
    return degree;
  }
  std::size_t checked_index(std::string_view label) const {
    const basis::Mask m = basis::parse(label);
    if (std::popcount(m) != degree_) throw InvalidArgument("basis label degree mismatch");
    return basis::index_of(m);
  }
  template <class Op>
  KForm& zip(const KForm& o, Op op) {
    if (o.degree_ != degree_) throw InvalidArgument("degree mismatch in form arithmetic");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) op(coeffs_[i], o.coeffs_[i]);
    return *this;
  }

  int degree_;
  GridSpec spec_;
  std::vector<ScalarField> coeffs_;
};

inline KForm operator+(KForm a, const KForm& b) { return a += b; }
inline KForm operator-(KForm a, const KForm& b) { return a -= b; }
inline KForm operator*(double c, KForm a) { return a *= c; }
inline KForm operator*(const ScalarField& g, KForm a) { return a *= g; }

inline double max_abs_diff(const KForm& a, const KForm& b) { return (a - b).max_abs(); }

/// 0-form from a function.
inline KForm zero_form(const ScalarField& f) { return KForm(0, std::vector<ScalarField>{f}); }

/// d, using dh = h_y e^1 + h_x e^2 on coefficients.
inline KForm exterior_derivative(const KForm& phi,
                                 DerivativeScheme scheme = DerivativeScheme::spectral) {
  if (phi.degree() >= 4) throw InvalidArgument("exterior derivative of a 4-form");
  KForm out(phi.degree() + 1, phi.spec());
  constexpr basis::Mask e1 = 0b0001, e2 = 0b0010;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const ScalarField& a = phi[i];
    if (a.is_zero()) continue;
    const basis::Mask m = phi.mask(i);
    ScalarField ay(a.spec()), ax(a.spec());
    if (scheme == DerivativeScheme::spectral) {
      auto g = gradient(a);
      ax = std::move(g.dx);
      ay = std::move(g.dy);
    } else {
      ax = partial_derivative(a, Axis::x, scheme);
      ay = partial_derivative(a, Axis::y, scheme);
    }
    if (int s = basis::wedge_sign(e1, m); s != 0)
      out[basis::index_of(e1 | m)] += static_cast<double>(s) * ay;
    if (int s = basis::wedge_sign(e2, m); s != 0)
      out[basis::index_of(e2 | m)] += static_cast<double>(s) * ax;
    for (const auto& t : basis::differential(m))
      out[basis::index_of(t.mask)] += static_cast<double>(t.sign) * a;
  }
  return out;
}

inline KForm wedge(const KForm& a, const KForm& b) {
  if (a.degree() + b.degree() > 4)
    throw InvalidArgument("wedge product of total degree " +
                          std::to_string(a.degree() + b.degree()));
  if (!(a.spec() == b.spec())) throw InvalidArgument("grid mismatch in wedge");
  KForm out(a.degree() + b.degree(), a.spec());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const int s = basis::wedge_sign(a.mask(i), b.mask(j));
      if (s == 0 || b[j].is_zero()) continue;
      out[basis::index_of(a.mask(i) | b.mask(j))] += static_cast<double>(s) * (a[i] * b[j]);
    }
  }
  return out;
}

/// Factorwise action of J; J o J = (-1)^k on k-forms.
inline KForm apply_j(const KForm& phi) {
  KForm out(phi.degree(), phi.spec());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const basis::Term t = basis::apply_j(phi.mask(i));
    out[basis::index_of(t.mask)] += static_cast<double>(t.sign) * phi[i];
  }
  return out;
}

/// (1,1)-part of a real 2-form: the J-invariant average (b + Jb)/2.
inline KForm project_one_one(const KForm& beta) {
  if (beta.degree() != 2) throw InvalidArgument("(1,1)-projection needs a 2-form");
  KForm out = beta + apply_j(beta);
  out *= 0.5;
  return out;
}

/// d^c f = J df, so that d d^c f = (f_xx + f_yy) e^12.
inline KForm dc_function(const ScalarField& f) {
  return apply_j(exterior_derivative(zero_form(f)));
}

}  // namespace ktflow
