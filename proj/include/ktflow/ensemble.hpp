#pragma once

// Seeded random test data: band-limited fields, random k-forms and random
// pluriclosed metrics with a prescribed lower bound on F.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "ktflow/forms.hpp"
#include "ktflow/grid.hpp"
#include "ktflow/metric.hpp"

namespace ktflow::ensemble {

/// sum over |kx|, |ky| <= max_mode of a_k cos(2 pi (kx x + ky y) + phi_k) with
/// a_k uniform in [-1, 1] times exp(-decay |k|). The mean mode is omitted.
inline ScalarField band_limited(GridSpec g, std::mt19937_64& rng, int max_mode = 8,
                                double decay = 2.0) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
  struct Mode {
    int kx, ky;
    std::complex<double> c;  // a e^{i phi}
  };
  std::vector<Mode> modes;
  for (int ky = -max_mode; ky <= max_mode; ++ky)
    for (int kx = 0; kx <= max_mode; ++kx) {
      if (kx == 0 && ky <= 0) continue;  // one representative of each +-k pair
      const double w = std::exp(-decay * std::hypot(kx, ky));
      const double a = amp(rng) * w;
      modes.push_back({kx, ky, std::polar(a, phase(rng))});
    }
  // cos(2 pi (kx x + ky y) + phi) = Re(e^{i phi} ex[kx](x) ey[ky](y)) with
  // per-axis exponential tables.
  const int n = g.n(), K = max_mode;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<std::complex<double>> ex(static_cast<std::size_t>(n) * (K + 1)),
      ey(static_cast<std::size_t>(n) * (2 * K + 1));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k <= K; ++k) ex[i * (K + 1) + k] = std::polar(1.0, two_pi * k * g.x(i));
    for (int k = -K; k <= K; ++k)
      ey[i * (2 * K + 1) + (k + K)] = std::polar(1.0, two_pi * k * g.y(i));
  }
  ScalarField out(g);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      double v = 0.0;
      for (const Mode& m : modes)
        v += (m.c * ex[ix * (K + 1) + m.kx] * ey[iy * (2 * K + 1) + (m.ky + K)])
                 .real();
      out[g.index(ix, iy)] = v;
    }
  return out;
}

/// band_limited scaled to max |f| = 1.
inline ScalarField unit_band_limited(GridSpec g, std::mt19937_64& rng, int max_mode = 8,
                                     double decay = 2.0) {
  ScalarField f = band_limited(g, rng, max_mode, decay);
  return f / f.max_abs();
}

/// Random form of the given degree with band-limited coefficients.
inline KForm random_form(GridSpec g, int degree, std::mt19937_64& rng, int max_mode = 8) {
  KForm out(degree, g);
  std::uniform_real_distribution<double> mean(-1.0, 1.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = band_limited(g, rng, max_mode) + mean(rng);
  return out;
}

/// Pluriclosed metric: s constant in [0.5, 2], u band-limited with amplitude
/// up to 0.3, F = 1 + 0.6 P / max|P| in [0.4, 1.6] and r = (F + |u|^2) / s.
inline HermitianMetricField random_pluriclosed_metric(GridSpec g, std::mt19937_64& rng,
                                                      int max_mode = 8, double decay = 2.0) {
  std::uniform_real_distribution<double> sdist(0.5, 2.0), udist(0.05, 0.3);
  const double s = sdist(rng);
  const ScalarField u1 = udist(rng) * unit_band_limited(g, rng, max_mode, decay);
  const ScalarField u2 = udist(rng) * unit_band_limited(g, rng, max_mode, decay);
  const ScalarField F = 1.0 + 0.6 * unit_band_limited(g, rng, max_mode, decay);
  ScalarField r = (F + u1 * u1 + u2 * u2) / s;
  return {std::move(r), ScalarField(g, s), u1, u2};
}

inline std::vector<HermitianMetricField> random_pluriclosed_ensemble(GridSpec g, int count = 20,
                                                                     std::uint64_t seed = 20240917,
                                                                     int max_mode = 8) {
  std::mt19937_64 rng(seed);
  std::vector<HermitianMetricField> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(random_pluriclosed_metric(g, rng, max_mode));
  return out;
}

}  // namespace ktflow::ensemble
