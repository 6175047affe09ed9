#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nlwave {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform periodic grid on [-L, L) with N points.
///
/// Spectra are stored in half-spectrum layout: mode j = 0..N/2 carries
/// wavenumber k_j = pi j / L, and the negative modes are implied by
/// conjugate symmetry. Mode N/2 is the Nyquist mode, which has no partner.
template <typename Scalar>
class Grid {
 public:
  static constexpr Eigen::Index kMinPoints = 16;

  Grid(Scalar half_width, Eigen::Index n_points) : half_width_(half_width), n_(n_points) {
    if (!(half_width > Scalar(0)) || !std::isfinite(static_cast<double>(half_width)))
      throw std::invalid_argument("grid half width must be positive and finite");
    if (n_points < kMinPoints || n_points % 2 != 0)
      throw std::invalid_argument("grid needs an even number of points >= 16, got " +
                                  std::to_string(n_points));
  }

  Scalar half_width() const { return half_width_; }
  Scalar period() const { return Scalar(2) * half_width_; }
  Eigen::Index size() const { return n_; }
  Scalar spacing() const { return period() / static_cast<Scalar>(n_); }

  Scalar x(Eigen::Index i) const { return -half_width_ + static_cast<Scalar>(i) * spacing(); }

  Vector<Scalar> points() const {
    Vector<Scalar> xs(n_);
    for (Eigen::Index i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
  }

  /// Number of stored modes in the half spectrum.
  Eigen::Index modes() const { return n_ / 2 + 1; }
  Eigen::Index nyquist() const { return n_ / 2; }

  Scalar wavenumber(Eigen::Index j) const {
    return std::numbers::pi_v<Scalar> * static_cast<Scalar>(j) / half_width_;
  }

  Vector<Scalar> wavenumbers() const {
    Vector<Scalar> ks(modes());
    for (Eigen::Index j = 0; j < modes(); ++j) ks[j] = wavenumber(j);
    return ks;
  }

  Scalar max_wavenumber() const { return wavenumber(nyquist()); }

  /// Index of the grid point closest to x (periodic wrap).
  Eigen::Index nearest_index(Scalar xv) const {
    const Scalar shifted = (xv + half_width_) / spacing();
    auto i = static_cast<Eigen::Index>(std::llround(static_cast<double>(shifted)));
    i %= n_;
    if (i < 0) i += n_;
    return i;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.half_width_ == b.half_width_ && a.n_ == b.n_;
  }

 private:
  Scalar half_width_;
  Eigen::Index n_;
};

}  // namespace nlwave
