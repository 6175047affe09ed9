#pragma once

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>

#include "nlwave/grid.hpp"

namespace nlwave {

template <typename Scalar>
using Spectrum = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Raised when a field carries NaN or Inf. Inside a simulation this is the
/// non-finite blow-up signal.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, Eigen::Index index)
      : std::runtime_error(what + ": non-finite value at index " + std::to_string(index)),
        index_(index) {}
  Eigen::Index index() const { return index_; }

 private:
  Eigen::Index index_;
};

/// Sobolev exponent s >= 0.
struct SobolevIndex {
  double s;
  explicit SobolevIndex(double value) : s(value) {
    if (!(value >= 0.0)) throw std::invalid_argument("Sobolev index must be nonnegative");
  }
  /// True for the well-posedness regime s > 3/2.
  bool strong() const { return s > 1.5; }
};

template <typename Scalar>
void require_finite(const Vector<Scalar>& v, const std::string& what) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(static_cast<double>(v[i]))) throw NonFiniteError(what, i);
}

namespace detail {

// Eigen's kissfft backend keeps scratch buffers, so every thread gets its own.
template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> engine = [] {
    Eigen::FFT<Scalar> f;
    f.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);
    return f;
  }();
  return engine;
}

}  // namespace detail

/// A sampled field on a periodic grid, optionally carrying its spectrum.
template <typename Scalar>
class StateField {
 public:
  StateField(Grid<Scalar> grid, Vector<Scalar> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("field has " + std::to_string(values_.size()) +
                                  " samples but the grid has " + std::to_string(grid_.size()));
  }

  static StateField zero(const Grid<Scalar>& grid) {
    return StateField(grid, Vector<Scalar>::Zero(grid.size()));
  }

  /// Samples f(x_i).
  template <typename Fn>
  static StateField sample(const Grid<Scalar>& grid, Fn&& fn) {
    Vector<Scalar> v(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) v[i] = fn(grid.x(i));
    return StateField(grid, std::move(v));
  }

  const Grid<Scalar>& grid() const { return grid_; }
  const Vector<Scalar>& values() const { return values_; }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }
  Eigen::Index size() const { return values_.size(); }

  bool has_spectrum() const { return static_cast<bool>(spectrum_); }
  const Spectrum<Scalar>* cached_spectrum() const { return spectrum_.get(); }

  bool finite() const { return values_.allFinite(); }

  /// Copy of this field with its spectrum attached.
  StateField with_spectrum() const;

  StateField& operator+=(const StateField& o) {
    check_grid(o);
    values_ += o.values_;
    spectrum_.reset();
    return *this;
  }
  StateField& operator-=(const StateField& o) {
    check_grid(o);
    values_ -= o.values_;
    spectrum_.reset();
    return *this;
  }
  StateField& operator*=(Scalar a) {
    values_ *= a;
    spectrum_.reset();
    return *this;
  }
  friend StateField operator+(StateField a, const StateField& b) { return a += b; }
  friend StateField operator-(StateField a, const StateField& b) { return a -= b; }
  friend StateField operator*(Scalar a, StateField f) { return f *= a; }
  friend StateField operator*(StateField f, Scalar a) { return f *= a; }

 private:
  void check_grid(const StateField& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("fields live on different grids");
  }

  Grid<Scalar> grid_;
  Vector<Scalar> values_;
  std::shared_ptr<const Spectrum<Scalar>> spectrum_;
};

/// Forward transform (half spectrum, unnormalized: mode 0 of a constant c is N c).
template <typename Scalar>
Spectrum<Scalar> forward(const Vector<Scalar>& values) {
  Spectrum<Scalar> out;
  detail::fft_engine<Scalar>().fwd(out, values);
  return out;
}

template <typename Scalar>
Spectrum<Scalar> forward(const StateField<Scalar>& f) {
  if (const auto* cached = f.cached_spectrum()) return *cached;
  return forward<Scalar>(f.values());
}

template <typename Scalar>
Vector<Scalar> inverse_values(const Grid<Scalar>& grid, const Spectrum<Scalar>& spec) {
  if (spec.size() != grid.modes())
    throw std::invalid_argument("spectrum length does not match the grid");
  Vector<Scalar> out;
  detail::fft_engine<Scalar>().inv(out, spec, grid.size());
  return out;
}

template <typename Scalar>
StateField<Scalar> inverse(const Grid<Scalar>& grid, const Spectrum<Scalar>& spec) {
  return StateField<Scalar>(grid, inverse_values(grid, spec));
}

template <typename Scalar>
StateField<Scalar> StateField<Scalar>::with_spectrum() const {
  StateField copy(*this);
  copy.spectrum_ = std::make_shared<const Spectrum<Scalar>>(forward<Scalar>(values_));
  return copy;
}

/// Multiplies a spectrum in place by (ik)^order. Odd orders zero the Nyquist mode.
template <typename Scalar>
void apply_derivative(const Grid<Scalar>& grid, Spectrum<Scalar>& spec, int order) {
  using Complex = std::complex<Scalar>;
  if (order < 0) throw std::invalid_argument("derivative order must be nonnegative");
  if (order == 0) return;
  for (Eigen::Index j = 0; j < spec.size(); ++j) {
    const Complex ik(Scalar(0), grid.wavenumber(j));
    Complex factor(1);
    for (int p = 0; p < order; ++p) factor *= ik;
    spec[j] *= factor;
  }
  if (order % 2 == 1) spec[grid.nyquist()] = Complex(0);
}

/// Multiplies a spectrum in place by 1/(1+k^2), the symbol of convolution with
/// p(x) = exp(-|x|)/2 on the line (periodized on the box).
template <typename Scalar>
void apply_helmholtz_inverse(const Grid<Scalar>& grid, Spectrum<Scalar>& spec) {
  for (Eigen::Index j = 0; j < spec.size(); ++j) {
    const Scalar k = grid.wavenumber(j);
    spec[j] /= Scalar(1) + k * k;
  }
}

/// Spectral derivative of order 1, 2 or 3.
template <typename Scalar>
StateField<Scalar> differentiate(const StateField<Scalar>& f, int order) {
  if (order < 1 || order > 3)
    throw std::invalid_argument("differentiate supports orders 1..3, got " + std::to_string(order));
  require_finite(f.values(), "differentiate");
  Spectrum<Scalar> spec = forward(f);
  apply_derivative(f.grid(), spec, order);
  return inverse(f.grid(), spec);
}

/// p * f, computed as the multiplier 1/(1+k^2).
template <typename Scalar>
StateField<Scalar> helmholtz_inverse(const StateField<Scalar>& f) {
  require_finite(f.values(), "helmholtz_inverse");
  Spectrum<Scalar> spec = forward(f);
  apply_helmholtz_inverse(f.grid(), spec);
  return inverse(f.grid(), spec);
}

/// Index of the first mode removed by the 2/3 rule (modes j with 3j >= N go).
inline Eigen::Index dealias_cutoff(Eigen::Index n_points) { return (n_points + 2) / 3; }

/// 2/3-rule truncation of a half spectrum.
template <typename Scalar>
Spectrum<Scalar> dealias(Spectrum<Scalar> spec) {
  const Eigen::Index n_points = 2 * (spec.size() - 1);
  const Eigen::Index first = std::min<Eigen::Index>(dealias_cutoff(n_points), spec.size());
  spec.segment(first, spec.size() - first).setZero();
  return spec;
}

/// Spectrum of the pointwise product a*b with the 2/3 rule applied.
template <typename Scalar>
Spectrum<Scalar> dealiased_product(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  return dealias(forward<Scalar>(a.cwiseProduct(b)));
}

/// Discrete H^s norm, normalized so that s = 0 gives the trapezoidal L^2 norm.
template <typename Scalar>
Scalar hs_norm(const StateField<Scalar>& f, SobolevIndex s) {
  require_finite(f.values(), "hs_norm");
  const auto& grid = f.grid();
  const Spectrum<Scalar> spec = forward(f);
  Scalar sum(0);
  for (Eigen::Index j = 0; j < spec.size(); ++j) {
    const Scalar k = grid.wavenumber(j);
    const Scalar weight = (j == 0 || j == grid.nyquist()) ? Scalar(1) : Scalar(2);
    sum += weight * std::pow(Scalar(1) + k * k, static_cast<Scalar>(s.s)) * std::norm(spec[j]);
  }
  const auto n = static_cast<Scalar>(grid.size());
  return std::sqrt(sum * grid.period() / (n * n));
}

/// Trapezoidal L^2 norm on the periodic grid.
template <typename Scalar>
Scalar l2_norm(const StateField<Scalar>& f) {
  return std::sqrt(f.values().squaredNorm() * f.grid().spacing());
}

template <typename Scalar>
Scalar max_abs(const StateField<Scalar>& f) {
  return f.values().cwiseAbs().maxCoeff();
}

/// Largest magnitude among the samples adjacent to x = -L (equivalently +L).
template <typename Scalar>
Scalar boundary_magnitude(const StateField<Scalar>& f) {
  const auto& v = f.values();
  const Eigen::Index n = v.size();
  return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[n - 1])});
}

/// f(x - shift) via the spectral phase factor exp(-i k shift).
template <typename Scalar>
StateField<Scalar> spectral_shift(const StateField<Scalar>& f, Scalar shift) {
  using Complex = std::complex<Scalar>;
  Spectrum<Scalar> spec = forward(f);
  const auto& grid = f.grid();
  for (Eigen::Index j = 0; j < spec.size(); ++j)
    spec[j] *= std::polar(Scalar(1), -grid.wavenumber(j) * shift);
  // The Nyquist mode has no conjugate partner; keep it real.
  spec[grid.nyquist()] = Complex(spec[grid.nyquist()].real(), Scalar(0));
  return inverse(grid, spec);
}

}  // namespace nlwave
