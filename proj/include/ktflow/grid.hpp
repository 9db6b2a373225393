#pragma once

// Periodic scalar fields on the unit square [0,1)^2 and their trigonometric
// (Fourier) calculus. Sample (ix, iy) sits at x = ix/n, y = iy/n and is
// stored at iy*n + ix.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ktflow/error.hpp"

namespace ktflow {

enum class Axis { x, y };

/// Spectral is the production scheme; the second-order centered difference
/// exists to cross-check it.
enum class DerivativeScheme { spectral, centered_difference };

class GridSpec {
 public:
  explicit GridSpec(int n) : n_(n) {
    if (n < 8 || n % 2 != 0)
      throw InvalidArgument("grid size must be even and >= 8, got " +
                            std::to_string(n));
  }

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }
  double spacing() const noexcept { return 1.0 / n_; }
  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(ix);
  }
  double x(int ix) const noexcept { return static_cast<double>(ix) / n_; }
  double y(int iy) const noexcept { return static_cast<double>(iy) / n_; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int n_;
};

class ScalarField {
 public:
  explicit ScalarField(GridSpec spec, double value = 0.0)
      : spec_(spec), values_(spec.size(), value) {}

  ScalarField(GridSpec spec, std::vector<double> values)
      : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.size())
      throw InvalidArgument("field has " + std::to_string(values_.size()) +
                            " samples, grid needs " +
                            std::to_string(spec_.size()));
  }

  /// Samples fn(x, y) on the grid.
  template <class Fn>
  static ScalarField sample(GridSpec spec, Fn&& fn) {
    ScalarField f(spec);
    for (int iy = 0; iy < spec.n(); ++iy)
      for (int ix = 0; ix < spec.n(); ++ix)
        f.values_[spec.index(ix, iy)] = fn(spec.x(ix), spec.y(iy));
    return f;
  }

  const GridSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator()(int ix, int iy) const noexcept {
    return values_[spec_.index(ix, iy)];
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
  }
  bool is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return v == 0.0; });
  }
  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Throws InvalidArgument naming the first non-finite sample.
  void require_finite(const char* what = "field") const {
    for (int iy = 0; iy < spec_.n(); ++iy)
      for (int ix = 0; ix < spec_.n(); ++ix)
        if (!std::isfinite(values_[spec_.index(ix, iy)]))
          throw InvalidArgument(std::string(what) +
                                ": non-finite sample at (ix=" +
                                std::to_string(ix) +
                                ", iy=" + std::to_string(iy) + ")");
  }

  ScalarField& operator+=(const ScalarField& o) { return zip(o, [](double& a, double b) { a += b; }); }
  ScalarField& operator-=(const ScalarField& o) { return zip(o, [](double& a, double b) { a -= b; }); }
  ScalarField& operator*=(const ScalarField& o) { return zip(o, [](double& a, double b) { a *= b; }); }
  ScalarField& operator/=(const ScalarField& o) { return zip(o, [](double& a, double b) { a /= b; }); }
  ScalarField& operator+=(double c) noexcept { for (double& v : values_) v += c; return *this; }
  ScalarField& operator-=(double c) noexcept { for (double& v : values_) v -= c; return *this; }
  ScalarField& operator*=(double c) noexcept { for (double& v : values_) v *= c; return *this; }
  ScalarField& operator/=(double c) noexcept { for (double& v : values_) v /= c; return *this; }

  ScalarField operator-() const {
    ScalarField out(*this);
    for (double& v : out.values_) v = -v;
    return out;
  }

 private:
  template <class Op>
  ScalarField& zip(const ScalarField& o, Op op) {
    if (!(o.spec_ == spec_)) throw InvalidArgument("grid mismatch in field arithmetic");
    for (std::size_t i = 0; i < values_.size(); ++i) op(values_[i], o.values_[i]);
    return *this;
  }

  GridSpec spec_;
  std::vector<double> values_;
};

inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
inline ScalarField operator/(ScalarField a, const ScalarField& b) { return a /= b; }
inline ScalarField operator+(ScalarField a, double c) { return a += c; }
inline ScalarField operator-(ScalarField a, double c) { return a -= c; }
inline ScalarField operator*(ScalarField a, double c) { return a *= c; }
inline ScalarField operator/(ScalarField a, double c) { return a /= c; }
inline ScalarField operator+(double c, ScalarField a) { return a += c; }
inline ScalarField operator*(double c, ScalarField a) { return a *= c; }
inline ScalarField operator-(double c, const ScalarField& a) { return (-a) += c; }

/// Pointwise fn(value).
template <class Fn>
ScalarField map(const ScalarField& f, Fn&& fn) {
  ScalarField out(f);
  for (double& v : out.values()) v = fn(v);
  return out;
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  if (!(a.spec() == b.spec())) throw InvalidArgument("grid mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct FieldStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;  // population convention
};

/// Sample statistics, summed in storage order so the result is reproducible
/// bit for bit. A field with min == max reports std exactly 0.
inline FieldStats spatial_stats(const ScalarField& f) {
  FieldStats s;
  const auto v = f.values();
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  if (s.min == s.max) {
    s.mean = s.min;
    return s;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(v.size()));
  return s;
}

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline RealBuffer alloc_real(std::size_t count) {
  return RealBuffer(fftw_alloc_real(count));
}
inline ComplexBuffer alloc_complex(std::size_t count) {
  return ComplexBuffer(fftw_alloc_complex(count));
}

/// r2c / c2r plan pair for one grid size. Planning is serialized (FFTW's
/// planner is not reentrant); execution on fresh buffers is thread safe.
class FftPlans {
 public:
  static const FftPlans& get(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<FftPlans>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot.reset(new FftPlans(n));
    return *slot;
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  int n() const noexcept { return n_; }
  std::size_t spectral_size() const noexcept {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_ / 2 + 1);
  }
  void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(forward_, in, out); }
  /// Destroys `in`.
  void inverse(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(inverse_, in, out); }

 private:
  explicit FftPlans(int n) : n_(n) {
    auto real = alloc_real(static_cast<std::size_t>(n) * n);
    auto cplx = alloc_complex(spectral_size());
    forward_ = fftw_plan_dft_r2c_2d(n, n, real.get(), cplx.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_2d(n, n, cplx.get(), real.get(), FFTW_ESTIMATE);
  }

  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace detail

/// Fourier coefficients of one field; derivatives taken from one Spectrum
/// share a single forward transform.
class Spectrum {
 public:
  explicit Spectrum(const ScalarField& f)
      : spec_(f.spec()),
        plans_(&detail::FftPlans::get(f.spec().n())),
        coeffs_(detail::alloc_complex(plans_->spectral_size())),
        constant_(std::adjacent_find(f.values().begin(), f.values().end(),
                                     std::not_equal_to<>()) == f.values().end()) {
    f.require_finite();
    auto in = detail::alloc_real(f.size());
    std::copy(f.values().begin(), f.values().end(), in.get());
    plans_->forward(in.get(), coeffs_.get());
  }

  /// First derivative; the Nyquist mode is dropped so the output is real.
  ScalarField derivative(Axis axis) const {
    const int n = spec_.n();
    const double two_pi = 2.0 * std::numbers::pi;
    return apply([&](int kx, int ky, int iy) -> std::complex<double> {
      if (axis == Axis::x)
        return kx == n / 2 ? 0.0 : std::complex<double>(0.0, two_pi * kx);
      return iy == n / 2 ? 0.0 : std::complex<double>(0.0, two_pi * ky);
    });
  }

  /// Sum of the per-axis second derivatives, each built as the square of the
  /// first-derivative multiplier (so Nyquist contributes nothing).
  ScalarField laplacian() const {
    const int n = spec_.n();
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    return apply([&](int kx, int ky, int iy) -> std::complex<double> {
      const double kx2 = kx == n / 2 ? 0.0 : static_cast<double>(kx) * kx;
      const double ky2 = iy == n / 2 ? 0.0 : static_cast<double>(ky) * ky;
      return -four_pi2 * (kx2 + ky2);
    });
  }

 private:
  // Every multiplier used here vanishes on the mean mode, so derivatives of a
  // constant field are returned as exact zeros.
  template <class Multiplier>
  ScalarField apply(Multiplier mult) const {
    if (constant_) return ScalarField(spec_);
    const int n = spec_.n();
    const int nk = n / 2 + 1;
    auto work = detail::alloc_complex(plans_->spectral_size());
    auto* src = reinterpret_cast<const std::complex<double>*>(coeffs_.get());
    auto* dst = reinterpret_cast<std::complex<double>*>(work.get());
    for (int iy = 0; iy < n; ++iy) {
      const int ky = iy <= n / 2 ? iy : iy - n;
      for (int kx = 0; kx < nk; ++kx) {
        const std::size_t k = static_cast<std::size_t>(iy) * nk + kx;
        dst[k] = src[k] * mult(kx, ky, iy);
      }
    }
    auto out = detail::alloc_real(spec_.size());
    plans_->inverse(work.get(), out.get());
    const double scale = 1.0 / static_cast<double>(spec_.size());
    std::vector<double> values(out.get(), out.get() + spec_.size());
    for (double& v : values) v *= scale;
    return ScalarField(spec_, std::move(values));
  }

  GridSpec spec_;
  const detail::FftPlans* plans_;
  detail::ComplexBuffer coeffs_;
  bool constant_;
};

namespace detail {

inline ScalarField centered_derivative(const ScalarField& f, Axis axis) {
  const GridSpec g = f.spec();
  const int n = g.n();
  ScalarField out(g);
  const double inv2h = 0.5 * n;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double fp = axis == Axis::x ? f((ix + 1) % n, iy) : f(ix, (iy + 1) % n);
      const double fm = axis == Axis::x ? f((ix + n - 1) % n, iy) : f(ix, (iy + n - 1) % n);
      out[g.index(ix, iy)] = (fp - fm) * inv2h;
    }
  return out;
}

inline ScalarField five_point_laplacian(const ScalarField& f) {
  const GridSpec g = f.spec();
  const int n = g.n();
  ScalarField out(g);
  const double inv_h2 = static_cast<double>(n) * n;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double c = f(ix, iy);
      out[g.index(ix, iy)] = (f((ix + 1) % n, iy) + f((ix + n - 1) % n, iy) +
                              f(ix, (iy + 1) % n) + f(ix, (iy + n - 1) % n) - 4.0 * c) *
                             inv_h2;
    }
  return out;
}

}  // namespace detail

inline ScalarField partial_derivative(const ScalarField& f, Axis axis,
                                      DerivativeScheme scheme = DerivativeScheme::spectral) {
  if (scheme == DerivativeScheme::centered_difference) {
    f.require_finite();
    return detail::centered_derivative(f, axis);
  }
  return Spectrum(f).derivative(axis);
}

inline ScalarField laplacian(const ScalarField& f,
                             DerivativeScheme scheme = DerivativeScheme::spectral) {
  if (scheme == DerivativeScheme::centered_difference) {
    f.require_finite();
    return detail::five_point_laplacian(f);
  }
  return Spectrum(f).laplacian();
}

struct Gradient {
  ScalarField dx;
  ScalarField dy;
};

inline Gradient gradient(const ScalarField& f) {
  Spectrum s(f);
  return {s.derivative(Axis::x), s.derivative(Axis::y)};
}

}  // namespace ktflow
