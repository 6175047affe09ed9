#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "nlwave/spectral.hpp"

namespace nlwave {

/// The two constants (gamma, omega) of
///   u_t - u_txx + 2 omega u_x + 3 u u_x = gamma (2 u_x u_xx + u u_xxx).
template <typename Scalar>
struct PdeParams {
  Scalar gamma{1};
  Scalar omega{0};

  PdeParams() = default;
  PdeParams(Scalar g, Scalar w) : gamma(g), omega(w) {
    if (!std::isfinite(static_cast<double>(g)))
      throw std::invalid_argument("gamma must be finite");
    if (!(w >= Scalar(0)) || !std::isfinite(static_cast<double>(w)))
      throw std::invalid_argument("omega must be finite and nonnegative");
  }

  /// gamma = 0 is the regularized long wave equation: every solution is global.
  bool global_regime() const { return gamma == Scalar(0); }
};

/// m(t) = inf_x gamma u_x(t, x) sampled on the grid, together with the
/// right-hand side of its Riccati-type evolution law evaluated at the minimizer.
template <typename Scalar>
struct SlopeSample {
  Scalar t{0};
  Scalar m{0};
  Scalar xi{0};
  Eigen::Index index{0};
  Scalar m_rhs{0};
};

template <typename Scalar>
struct EnergySample {
  Scalar t{0};
  Scalar energy{0};
};

namespace detail {

template <typename Scalar>
void require_finite_result(const StateField<Scalar>& f, const char* what) {
  require_finite(f.values(), what);
}

/// Derivatives of u obtained from a single forward transform.
template <typename Scalar>
struct Derivatives {
  Spectrum<Scalar> u_hat;
  Vector<Scalar> ux;
  Vector<Scalar> uxx;
  Vector<Scalar> uxxx;
};

template <typename Scalar>
Derivatives<Scalar> derivatives(const StateField<Scalar>& u, int max_order) {
  Derivatives<Scalar> d;
  d.u_hat = forward(u);
  const auto& grid = u.grid();
  auto take = [&](int order) {
    Spectrum<Scalar> s = d.u_hat;
    apply_derivative(grid, s, order);
    return inverse_values(grid, s);
  };
  if (max_order >= 1) d.ux = take(1);
  if (max_order >= 2) d.uxx = take(2);
  if (max_order >= 3) d.uxxx = take(3);
  return d;
}

/// p * ((3-gamma)gamma/2 u^2 + gamma^2/2 u_x^2 + 2 omega gamma u), products dealiased.
template <typename Scalar>
Vector<Scalar> slope_convolution(const Grid<Scalar>& grid, const Vector<Scalar>& u,
                                 const Spectrum<Scalar>& u_hat, const Vector<Scalar>& ux,
                                 const PdeParams<Scalar>& p) {
  const Scalar g = p.gamma;
  const Vector<Scalar> quad =
      ((Scalar(3) - g) * g / Scalar(2)) * u.array().square() + (g * g / Scalar(2)) * ux.array().square();
  Spectrum<Scalar> s = dealias(forward<Scalar>(quad));
  s += (Scalar(2) * p.omega * g) * u_hat;
  apply_helmholtz_inverse(grid, s);
  return inverse_values(grid, s);
}

}  // namespace detail

/// u_t from the nonlocal form
///   u_t = -gamma u u_x - d/dx p * ((3-gamma)/2 u^2 + gamma/2 u_x^2 + 2 omega u).
template <typename Scalar>
StateField<Scalar> rhs_nonlocal(const StateField<Scalar>& u, const PdeParams<Scalar>& p) {
  using Complex = std::complex<Scalar>;
  require_finite(u.values(), "rhs_nonlocal");
  const auto& grid = u.grid();
  const auto d = detail::derivatives(u, 1);
  const auto& v = u.values();

  const Vector<Scalar> quad = ((Scalar(3) - p.gamma) / Scalar(2)) * v.array().square() +
                              (p.gamma / Scalar(2)) * d.ux.array().square();
  Spectrum<Scalar> flux = dealias(forward<Scalar>(quad));
  flux += (Scalar(2) * p.omega) * d.u_hat;
  const Spectrum<Scalar> transport = dealiased_product<Scalar>(v, d.ux);

  Spectrum<Scalar> out(flux.size());
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const Scalar k = grid.wavenumber(j);
    const Complex dx_p(Scalar(0), k / (Scalar(1) + k * k));
    out[j] = -p.gamma * transport[j] - dx_p * flux[j];
  }
  out[grid.nyquist()] = -p.gamma * transport[grid.nyquist()];

  auto result = inverse(grid, out);
  detail::require_finite_result(result, "rhs_nonlocal result");
  return result;
}

/// u_t from the momentum form: with y = u - u_xx,
///   y_t = -gamma y_x u - 2 gamma y u_x - 2 omega u_x - 3(1-gamma) u u_x,
/// and u_t = p * y_t.
template <typename Scalar>
StateField<Scalar> rhs_momentum(const StateField<Scalar>& u, const PdeParams<Scalar>& p) {
  using Complex = std::complex<Scalar>;
  require_finite(u.values(), "rhs_momentum");
  const auto& grid = u.grid();
  const auto d = detail::derivatives(u, 3);
  const auto v = u.values().array();
  const auto ux = d.ux.array();

  const Vector<Scalar> y = (v - d.uxx.array()).matrix();
  const Vector<Scalar> yx = (ux - d.uxxx.array()).matrix();
  const Vector<Scalar> nonlinear =
      -p.gamma * yx.array() * v - Scalar(2) * p.gamma * y.array() * ux -
      Scalar(3) * (Scalar(1) - p.gamma) * v * ux;

  Spectrum<Scalar> yt = dealias(forward<Scalar>(nonlinear));
  for (Eigen::Index j = 0; j < yt.size(); ++j) {
    const Complex ik(Scalar(0), grid.wavenumber(j));
    if (j != grid.nyquist()) yt[j] -= Scalar(2) * p.omega * ik * d.u_hat[j];
  }
  apply_helmholtz_inverse(grid, yt);
  auto result = inverse(grid, yt);
  detail::require_finite_result(result, "rhs_momentum result");
  return result;
}

/// Max-norm residual of u_t - u_txx + 2 omega u_x + 3 u u_x - gamma (2 u_x u_xx + u u_xxx),
/// with the time derivative supplied by the caller.
template <typename Scalar>
Scalar pde_residual(const StateField<Scalar>& u, const StateField<Scalar>& u_t,
                    const PdeParams<Scalar>& p) {
  require_finite(u.values(), "pde_residual u");
  require_finite(u_t.values(), "pde_residual u_t");
  const auto d = detail::derivatives(u, 3);
  const Vector<Scalar> utxx = differentiate(u_t, 2).values();
  const auto v = u.values().array();
  const Vector<Scalar> r =
      (u_t.values().array() - utxx.array() + Scalar(2) * p.omega * d.ux.array() +
       Scalar(3) * v * d.ux.array() -
       p.gamma * (Scalar(2) * d.ux.array() * d.uxx.array() + v * d.uxxx.array()))
          .matrix();
  return r.cwiseAbs().maxCoeff();
}

/// E(u) = integral of u^2 + u_x^2 over the periodic box (trapezoidal rule).
template <typename Scalar>
EnergySample<Scalar> energy(const StateField<Scalar>& u, Scalar t = Scalar(0)) {
  require_finite(u.values(), "energy");
  const auto d = detail::derivatives(u, 1);
  const Scalar e = (u.values().squaredNorm() + d.ux.squaredNorm()) * u.grid().spacing();
  return {t, e};
}

/// Locates the grid minimum of gamma u_x (smallest index on ties) and evaluates
///   -m^2/2 + (3-gamma)gamma/2 u^2 + 2 omega gamma u - p * (...)
/// at that point.
template <typename Scalar>
SlopeSample<Scalar> slope_sample(const StateField<Scalar>& u, const PdeParams<Scalar>& p,
                                 Scalar t = Scalar(0)) {
  require_finite(u.values(), "slope_sample");
  const auto& grid = u.grid();
  SlopeSample<Scalar> s;
  s.t = t;
  s.xi = grid.x(0);
  if (p.global_regime()) return s;

  const auto d = detail::derivatives(u, 1);
  const Vector<Scalar> gux = p.gamma * d.ux;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < gux.size(); ++i)
    if (gux[i] < gux[best]) best = i;

  const Vector<Scalar> conv = detail::slope_convolution(grid, u.values(), d.u_hat, d.ux, p);
  const Scalar g = p.gamma;
  const Scalar ui = u[best];
  s.m = gux[best];
  s.index = best;
  s.xi = grid.x(best);
  s.m_rhs = -s.m * s.m / Scalar(2) + (Scalar(3) - g) * g / Scalar(2) * ui * ui +
            Scalar(2) * p.omega * g * ui - conv[best];
  return s;
}

/// gamma u_tx as a whole field:
///   -gamma^2/2 u_x^2 - gamma^2 u u_xx + (3-gamma)gamma/2 u^2 + 2 omega gamma u - p * (...).
template <typename Scalar>
StateField<Scalar> utx_field(const StateField<Scalar>& u, const PdeParams<Scalar>& p) {
  require_finite(u.values(), "utx_field");
  const auto& grid = u.grid();
  const auto d = detail::derivatives(u, 2);
  const Scalar g = p.gamma;
  const auto v = u.values().array();
  const Vector<Scalar> conv = detail::slope_convolution(grid, u.values(), d.u_hat, d.ux, p);
  Vector<Scalar> out = (-g * g / Scalar(2) * d.ux.array().square() - g * g * v * d.uxx.array() +
                        (Scalar(3) - g) * g / Scalar(2) * v.square() + Scalar(2) * p.omega * g * v)
                           .matrix() -
                       conv;
  return StateField<Scalar>(grid, std::move(out));
}

}  // namespace nlwave
