#pragma once

// Real-coframe expansions of the complex 2-forms built from the (1,0)-frame
//   phi^1 = e^1 + i e^2,   phi^2 = e^3 + i e^4.
// Coefficients are listed on the real 2-form basis e12 e13 e14 e23 e24 e34.
// The inverse table expresses each real basis element in the complex frame.

#include <array>
#include <complex>

namespace ktflow::complex_frame {

using Coeffs = std::array<std::complex<double>, 6>;
constexpr std::complex<double> I{0.0, 1.0};

enum class Pair { p11bar, p22bar, p12bar, p21bar, p12, p1bar2bar };

/// phi^a ^ phi^b (bars denote conjugates) in the real basis.
inline Coeffs to_real(Pair p) {
  switch (p) {
    case Pair::p11bar:    return {-2.0 * I, 0, 0, 0, 0, 0};
    case Pair::p22bar:    return {0, 0, 0, 0, 0, -2.0 * I};
    case Pair::p12bar:    return {0, 1.0, -I, I, 1.0, 0};
    case Pair::p21bar:    return {0, -1.0, -I, I, -1.0, 0};
    case Pair::p12:       return {0, 1.0, I, I, -1.0, 0};
    case Pair::p1bar2bar: return {0, 1.0, -I, -I, -1.0, 0};
  }
  return {};
}

/// Complex-frame coefficients of one real basis element, ordered as
/// {11bar, 22bar, 12bar, 21bar, 12, 1bar2bar}.
using FrameCoeffs = std::array<std::complex<double>, 6>;

inline FrameCoeffs from_real(int basis_index) {
  switch (basis_index) {
    case 0: return {0.5 * I, 0, 0, 0, 0, 0};                           // e12
    case 1: return {0, 0, 0.25, -0.25, 0.25, 0.25};                    // e13
    case 2: return {0, 0, 0.25 * I, 0.25 * I, -0.25 * I, 0.25 * I};    // e14
    case 3: return {0, 0, -0.25 * I, -0.25 * I, -0.25 * I, 0.25 * I};  // e23
    case 4: return {0, 0, 0.25, -0.25, -0.25, -0.25};                  // e24
    case 5: return {0, 0.5 * I, 0, 0, 0, 0};                           // e34
  }
  return {};
}

}  // namespace ktflow::complex_frame
