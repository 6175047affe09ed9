#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlwave/timestepper.hpp"

namespace nlwave {

template <typename Scalar>
struct SolitonParams {
  Scalar c;
  PdeParams<Scalar> params;

  SolitonParams(Scalar speed, PdeParams<Scalar> p) : c(speed), params(p) {
    if (!(c > Scalar(0)) || !std::isfinite(static_cast<double>(c)))
      throw std::invalid_argument("soliton speed c must be positive");
  }

  Scalar amplitude() const { return c - Scalar(2) * params.omega; }
  /// c - gamma a; positive exactly when c(gamma - 1) < 2 omega gamma.
  Scalar peak_denominator() const { return c - params.gamma * amplitude(); }
  Scalar decay_rate() const { return std::sqrt(amplitude() / c); }
  Scalar peak_curvature() const {
    const Scalar a = amplitude();
    return a * a / (Scalar(4) * peak_denominator());
  }
};

struct Admissibility {
  bool admissible = false;
  /// Violated inequalities, "; "-separated; empty when admissible.
  std::string diagnostic;
  explicit operator bool() const { return admissible; }
};

template <typename Scalar>
Admissibility check_admissible(const SolitonParams<Scalar>& sp) {
  const Scalar g = sp.params.gamma, w = sp.params.omega;
  std::vector<std::string> violated;
  if (!(sp.c * (g - Scalar(1)) < Scalar(2) * w * g)) violated.push_back("c(gamma-1) < 2*omega*gamma violated");
  if (!(sp.c > Scalar(2) * w)) violated.push_back("c > 2*omega violated");
  Admissibility out;
  out.admissible = violated.empty();
  for (std::size_t i = 0; i < violated.size(); ++i) out.diagnostic += (i ? "; " : "") + violated[i];
  return out;
}

/// Largest admissible speed for gamma > 1; infinite otherwise.
template <typename Scalar>
Scalar speed_cap(const PdeParams<Scalar>& p) {
  if (p.gamma > Scalar(1)) return Scalar(2) * p.omega * p.gamma / (p.gamma - Scalar(1));
  return std::numeric_limits<Scalar>::infinity();
}

class InadmissibleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
struct SolitonProfile {
  SolitonParams<Scalar> params;
  /// phi_c on the grid, peak at x = 0.
  StateField<Scalar> phi;
  /// phi_c' from the same integration (not a spectral derivative).
  StateField<Scalar> phi_x;
  /// Decay rate measured from the log-slope of the tail.
  Scalar kappa;
};

struct ProfileOptions {
  /// phi(L) must lie below boundary_tolerance * a.
  double boundary_tolerance = 1e-8;
  /// Profile values below tail_cutoff * a are set to zero.
  double tail_cutoff = 1e-14;
  /// Integration substep as a fraction of the smallest profile length scale.
  double substep_fraction = 1e-3;
};

namespace detail {

// Peak branch: sigma = sqrt(a - phi) is smooth in x with sigma(0) = 0.
template <typename Scalar>
Scalar sigma_rate(Scalar s, Scalar a, Scalar d0, Scalar g) {
  return (a - s * s) / (Scalar(2) * std::sqrt(d0 + g * s * s));
}

// Tail branch: w = ln phi.
template <typename Scalar>
Scalar log_rate(Scalar w, Scalar a, Scalar c, Scalar g) {
  const Scalar phi = std::exp(w);
  return -std::sqrt(std::max(a - phi, Scalar(0)) / (c - g * phi));
}

template <typename Scalar, typename Rate>
Scalar rk4(Scalar y, Scalar dx, Rate&& f) {
  const Scalar k1 = f(y);
  const Scalar k2 = f(y + dx / 2 * k1);
  const Scalar k3 = f(y + dx / 2 * k2);
  const Scalar k4 = f(y + dx * k3);
  return y + dx / 6 * (k1 + 2 * (k2 + k3) + k4);
}

}  // namespace detail

/// Smallest length scale of phi_c: peak width, tail length, and for gamma > 0
/// the distance from the peak to the complex branch point of c - gamma phi.
template <typename Scalar>
Scalar profile_feature_length(const SolitonParams<Scalar>& sp) {
  const Scalar a = sp.amplitude(), d0 = sp.peak_denominator(), g = sp.params.gamma;
  Scalar feature = std::min(Scalar(2) * std::sqrt(d0) / std::sqrt(a), Scalar(1) / sp.decay_rate());
  if (g > Scalar(0)) feature = std::min(feature, Scalar(2) * d0 / (a * std::sqrt(g)));
  return feature;
}

/// Power-of-two grid with phi(L) ~ tail_level * a and spacing at most
/// feature / points_per_feature.
template <typename Scalar>
Grid<Scalar> suggested_grid(const SolitonParams<Scalar>& sp, Scalar tail_level = Scalar(1e-11),
                            Scalar points_per_feature = Scalar(8)) {
  const Scalar L = std::ceil(-std::log(tail_level) / sp.decay_rate());
  const Scalar h = profile_feature_length(sp) / points_per_feature;
  Eigen::Index n = 64;
  while (Scalar(2) * L / static_cast<Scalar>(n) > h) n *= 2;
  return Grid<Scalar>(L, n);
}

/// Builds phi_c by marching the first-integral ODE from the peak to x = L,
/// landing on every grid point, then mirroring.
template <typename Scalar>
SolitonProfile<Scalar> build_profile(const SolitonParams<Scalar>& sp, const Grid<Scalar>& grid,
                                     const ProfileOptions& opt = {}) {
  if (const auto adm = check_admissible(sp); !adm)
    throw InadmissibleError("inadmissible soliton parameters: " + adm.diagnostic);

  const Scalar c = sp.c, g = sp.params.gamma;
  const Scalar a = sp.amplitude();
  const Scalar d0 = sp.peak_denominator();
  const Scalar kappa_law = sp.decay_rate();
  const Scalar feature = profile_feature_length(sp);
  const Scalar h = grid.spacing();
  const auto substeps = static_cast<long>(std::ceil(h / (static_cast<Scalar>(opt.substep_fraction) * feature)));
  const Scalar dx = h / static_cast<Scalar>(substeps);
  const Eigen::Index half = grid.size() / 2;
  const Scalar switch_sigma = std::sqrt(a / Scalar(2));

  // phi and phi' at x_j = j h, j = 0..half.
  std::vector<Scalar> phi(half + 1), dphi(half + 1);
  Scalar sigma = 0, w = 0;
  bool tail = false;
  auto store = [&](Eigen::Index j) {
    if (!tail) {
      phi[j] = a - sigma * sigma;
      dphi[j] = -Scalar(2) * sigma * detail::sigma_rate(sigma, a, d0, g);
    } else {
      phi[j] = std::exp(w);
      dphi[j] = phi[j] * detail::log_rate(w, a, c, g);
    }
  };
  store(0);
  for (Eigen::Index j = 1; j <= half; ++j) {
    for (long s = 0; s < substeps; ++s) {
      if (!tail) {
        sigma = detail::rk4(sigma, dx, [&](Scalar y) { return detail::sigma_rate(y, a, d0, g); });
        if (sigma >= switch_sigma) {
          tail = true;
          w = std::log(a - sigma * sigma);
        }
      } else {
        w = detail::rk4(w, dx, [&](Scalar y) { return detail::log_rate(y, a, c, g); });
      }
    }
    store(j);
  }

  const Scalar at_boundary = phi[half];
  if (at_boundary > static_cast<Scalar>(opt.boundary_tolerance) * a) {
    const Scalar need = grid.half_width() +
                        std::log(at_boundary / (static_cast<Scalar>(opt.boundary_tolerance) * a)) / kappa_law;
    std::ostringstream msg;
    msg << "grid too narrow for the soliton tail: phi(L)/a = " << at_boundary / a
        << ", required L >= " << std::ceil(static_cast<double>(need));
    throw std::invalid_argument(msg.str());
  }

  const Scalar cutoff = static_cast<Scalar>(opt.tail_cutoff) * a;
  Vector<Scalar> v(grid.size()), vx(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Eigen::Index j = i - half;
    const Eigen::Index k = std::abs(j);
    const bool zero = phi[k] < cutoff;
    v[i] = zero ? Scalar(0) : phi[k];
    vx[i] = zero ? Scalar(0) : (j < 0 ? -dphi[k] : dphi[k]);
  }

  // Least-squares log-slope over the resolved part of the tail.
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (Eigen::Index j = 0; j <= half; ++j) {
    if (phi[j] > Scalar(1e-3) * a || phi[j] < Scalar(1e-12) * a) continue;
    const Scalar x = h * static_cast<Scalar>(j), y = std::log(phi[j]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 3) throw std::invalid_argument("grid does not resolve the soliton tail; widen the box or refine");
  const Scalar kappa = -(n * sxy - sx * sy) / (n * sxx - sx * sx);

  return {sp, StateField<Scalar>(grid, std::move(v)), StateField<Scalar>(grid, std::move(vx)), kappa};
}

/// max |(phi')^2 (c - gamma phi) - phi^2 (c - 2 omega - phi)| / (c a^2), with a
/// spectral derivative.
template <typename Scalar>
Scalar first_integral_residual(const SolitonProfile<Scalar>& prof) {
  const auto& sp = prof.params;
  const Scalar a = sp.amplitude();
  const Vector<Scalar> f = prof.phi.values();
  const Vector<Scalar> fx = differentiate(prof.phi, 1).values();
  const Vector<Scalar> r = fx.array().square() * (sp.c - sp.params.gamma * f.array()) - f.array().square() * (a - f.array());
  return r.cwiseAbs().maxCoeff() / (sp.c * a * a);
}

/// max |(2 omega - c) phi + c phi'' + 3/2 phi^2 - gamma/2 (phi')^2 - gamma phi phi''|.
template <typename Scalar>
Scalar profile_equation_residual(const SolitonProfile<Scalar>& prof) {
  const auto& sp = prof.params;
  const Scalar c = sp.c, g = sp.params.gamma, w = sp.params.omega;
  const Vector<Scalar> f = prof.phi.values();
  const Vector<Scalar> fx = differentiate(prof.phi, 1).values();
  const Vector<Scalar> fxx = differentiate(prof.phi, 2).values();
  const Vector<Scalar> r = (Scalar(2) * w - c) * f.array() + c * fxx.array() + Scalar(1.5) * f.array().square() -
                           Scalar(0.5) * g * fx.array().square() - g * f.array() * fxx.array();
  return r.cwiseAbs().maxCoeff();
}

/// Peak location with quadratic sub-grid interpolation (periodic neighbours).
template <typename Scalar>
Scalar peak_position(const StateField<Scalar>& u) {
  const auto& v = u.values();
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  const Eigen::Index n = v.size();
  const Scalar fm = v[(i + n - 1) % n], f0 = v[i], fp = v[(i + 1) % n];
  const Scalar denom = fm - Scalar(2) * f0 + fp;
  const Scalar offset = denom < Scalar(0) ? Scalar(0.5) * (fm - fp) / denom : Scalar(0);
  return u.grid().x(i) + offset * u.grid().spacing();
}

template <typename Scalar>
struct TravelingReport {
  StopReason stop_reason = StopReason::reached_t_end;
  bool completed = false;
  std::vector<Scalar> times;
  /// ||u(t) - phi(. - c t)||_2 / ||phi||_2 at each sample.
  std::vector<Scalar> rel_l2_error;
  std::vector<Scalar> max_error;
  std::vector<Scalar> peak_positions;
  Scalar max_rel_l2{0};
  Scalar max_abs_error{0};
  Scalar measured_speed{0};
  Scalar max_energy_drift{0};
};

/// Evolves phi_c and compares against the translated profile at every sample.
template <typename Scalar>
TravelingReport<Scalar> verify_traveling(const SolitonProfile<Scalar>& prof, const SolverConfig& cfg) {
  if (!(max_abs(prof.phi) > Scalar(0)) || prof.phi.values().minCoeff() < Scalar(0))
    throw std::invalid_argument("soliton profile must be positive and nontrivial");

  TravelingReport<Scalar> rep;
  const Scalar c = prof.params.c;
  const Scalar ref_norm = l2_norm(prof.phi);
  const Scalar period = prof.phi.grid().period();
  auto observe = [&](Scalar t, const StateField<Scalar>& u) {
    const auto expect = spectral_shift(prof.phi, c * t);
    const auto diff = u - expect;
    rep.times.push_back(t);
    rep.rel_l2_error.push_back(l2_norm(diff) / ref_norm);
    rep.max_error.push_back(max_abs(diff));
    Scalar x = peak_position(u);
    // Unwrap periodic motion by continuity.
    if (!rep.peak_positions.empty()) {
      const Scalar prev = rep.peak_positions.back();
      x += period * std::round((prev - x) / period);
    }
    rep.peak_positions.push_back(x);
  };
  const auto res = simulate(prof.phi, prof.params.params, cfg, observe);
  rep.stop_reason = res.stop_reason;
  rep.completed = res.stop_reason == StopReason::reached_t_end;
  rep.max_energy_drift = res.max_energy_drift;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    rep.max_rel_l2 = std::max(rep.max_rel_l2, rep.rel_l2_error[i]);
    rep.max_abs_error = std::max(rep.max_abs_error, rep.max_error[i]);
  }
  const auto n = static_cast<Scalar>(rep.times.size());
  if (rep.times.size() >= 2) {
    Scalar st = 0, sx = 0, stt = 0, stx = 0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
      st += rep.times[i];
      sx += rep.peak_positions[i];
      stt += rep.times[i] * rep.times[i];
      stx += rep.times[i] * rep.peak_positions[i];
    }
    rep.measured_speed = (n * stx - st * sx) / (n * stt - st * st);
  }
  return rep;
}

}  // namespace nlwave
