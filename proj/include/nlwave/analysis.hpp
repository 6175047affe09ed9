#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nlwave/timestepper.hpp"

namespace nlwave {

enum class GammaCase { low, mid, high_or_neg, zero };

inline const char* to_string(GammaCase c) {
  switch (c) {
    case GammaCase::low: return "low";
    case GammaCase::mid: return "mid";
    case GammaCase::high_or_neg: return "high_or_neg";
    case GammaCase::zero: return "zero";
  }
  return "unknown";
}

/// low: 0 < gamma < 3/2, mid: 3/2 <= gamma <= 3, high_or_neg: gamma > 3 or gamma < 0.
template <typename Scalar>
GammaCase gamma_case(Scalar gamma) {
  if (gamma == Scalar(0)) return GammaCase::zero;
  if (gamma < Scalar(0) || gamma > Scalar(3)) return GammaCase::high_or_neg;
  if (gamma < Scalar(1.5)) return GammaCase::low;
  return GammaCase::mid;
}

/// The bracket K of the existence-time bound, evaluated with the formula of
/// the given case regardless of where gamma lies.
template <typename Scalar>
Scalar bound_bracket(GammaCase which, Scalar gamma, Scalar omega, Scalar e0) {
  const Scalar linear = Scalar(4) * std::numbers::sqrt2_v<Scalar> * omega * std::abs(gamma) * std::sqrt(e0);
  switch (which) {
    case GammaCase::low: return (Scalar(3) - gamma) * gamma / Scalar(2) * e0 + linear;
    case GammaCase::mid: return gamma * gamma / Scalar(2) * e0 + linear;
    case GammaCase::high_or_neg: return (Scalar(2) * gamma - Scalar(3)) * gamma / Scalar(2) * e0 + linear;
    case GammaCase::zero: return Scalar(0);
  }
  return Scalar(0);
}

template <typename Scalar>
Scalar bound_bracket(Scalar gamma, Scalar omega, Scalar e0) {
  return bound_bracket(gamma_case(gamma), gamma, omega, e0);
}

/// (2/sqrt K)(pi/2 + atan(m0/sqrt K)); +infinity for K <= 0.
template <typename Scalar>
Scalar lower_bound_time(Scalar K, Scalar m0) {
  if (!(K > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  const Scalar r = std::sqrt(K);
  return Scalar(2) / r * (std::numbers::pi_v<Scalar> / Scalar(2) + std::atan(m0 / r));
}

/// -2 atan(sqrt K / m0) / sqrt K, the form valid for m0 < 0.
template <typename Scalar>
Scalar lower_bound_time_negative_slope(Scalar K, Scalar m0) {
  if (!(m0 < Scalar(0))) throw std::invalid_argument("this form of the bound needs m0 < 0");
  if (!(K > Scalar(0))) throw std::invalid_argument("bracket K must be positive");
  const Scalar r = std::sqrt(K);
  return Scalar(-2) * std::atan(r / m0) / r;
}

/// -sqrt(|(gamma - 3) gamma|/2 E0 + 4 sqrt2 omega |gamma| sqrt E0).
template <typename Scalar>
Scalar blowup_threshold(Scalar gamma, Scalar omega, Scalar e0) {
  const Scalar k = std::abs((gamma - Scalar(3)) * gamma) / Scalar(2) * e0 +
                   Scalar(4) * std::numbers::sqrt2_v<Scalar> * omega * std::abs(gamma) * std::sqrt(e0);
  return -std::sqrt(k);
}

template <typename Scalar>
struct BoundResult {
  Scalar E0{0};
  Scalar m0{0};
  Scalar K{0};
  GammaCase gamma_case = GammaCase::zero;
  Scalar T_lower = std::numeric_limits<Scalar>::infinity();
};

template <typename Scalar>
BoundResult<Scalar> existence_bound(Scalar e0, Scalar m0, const PdeParams<Scalar>& p) {
  if (!(e0 >= Scalar(0))) throw std::invalid_argument("E0 must be nonnegative");
  BoundResult<Scalar> out;
  out.E0 = e0;
  out.m0 = m0;
  out.gamma_case = gamma_case(p.gamma);
  out.K = bound_bracket(out.gamma_case, p.gamma, p.omega, e0);
  if (out.gamma_case != GammaCase::zero && e0 > Scalar(0)) out.T_lower = lower_bound_time(out.K, m0);
  return out;
}

template <typename Scalar>
BoundResult<Scalar> existence_bound(const StateField<Scalar>& u0, const PdeParams<Scalar>& p) {
  return existence_bound(energy(u0).energy, slope_sample(u0, p).m, p);
}

template <typename Scalar>
struct BlowupVerdict {
  Scalar threshold{0};
  Scalar E0{0};
  /// Grid point where gamma u0' is smallest, when it lies below the threshold.
  std::optional<Scalar> witness_x0;
  std::optional<Eigen::Index> witness_index;
  bool triggered = false;
};

template <typename Scalar>
BlowupVerdict<Scalar> blowup_condition(const StateField<Scalar>& u0, const PdeParams<Scalar>& p) {
  if (p.global_regime())
    throw std::invalid_argument("the blow-up criterion needs gamma != 0; for gamma = 0 all solutions are global");
  BlowupVerdict<Scalar> v;
  v.E0 = energy(u0).energy;
  v.threshold = blowup_threshold(p.gamma, p.omega, v.E0);
  const auto s = slope_sample(u0, p);
  if (s.m < v.threshold) {
    v.triggered = true;
    v.witness_x0 = s.xi;
    v.witness_index = s.index;
  }
  return v;
}

template <typename Scalar>
struct FamilyMember {
  Scalar alpha;
  StateField<Scalar> u0;
};

template <typename Scalar>
struct SharpnessRow {
  std::size_t member = 0;
  Scalar alpha{0};
  BoundResult<Scalar> bound;
  std::optional<Scalar> t_star;
  Scalar t_stop{0};
  StopReason stop_reason = StopReason::reached_t_end;
  Scalar max_energy_drift{0};
  /// No blow-up before t_end.
  bool censored = false;
  /// Set when the member could not be run; the row carries no result.
  std::optional<std::string> error;

  std::optional<Scalar> ratio() const {
    if (!t_star || !std::isfinite(static_cast<double>(bound.T_lower))) return std::nullopt;
    return *t_star / bound.T_lower;
  }
};

struct SharpnessOptions {
  double tolerance = 0.02;
  /// 0 picks the hardware concurrency.
  unsigned workers = 1;
  /// When set, each member stops at m <= -threshold_factor |m0| instead of
  /// the configured absolute threshold.
  std::optional<double> threshold_factor;
};

template <typename Scalar>
struct SharpnessTable {
  std::vector<SharpnessRow<Scalar>> rows;
  double tolerance = 0.02;

  /// Every member that blew up has t* >= T_lower (1 - tolerance).
  bool bound_respected() const {
    for (const auto& r : rows)
      if (const auto q = r.ratio(); q && *q < Scalar(1 - tolerance)) return false;
    return true;
  }
};

template <typename Scalar>
SharpnessRow<Scalar> run_member(std::size_t index, const FamilyMember<Scalar>& m, const PdeParams<Scalar>& p,
                                SolverConfig cfg, const SharpnessOptions& opt) {
  SharpnessRow<Scalar> row;
  row.member = index;
  row.alpha = m.alpha;
  row.bound = existence_bound(m.u0, p);
  if (opt.threshold_factor) {
    const double scaled = *opt.threshold_factor * std::abs(static_cast<double>(row.bound.m0));
    if (scaled > 0) cfg.blowup_m_threshold = scaled;
  }
  const auto res = simulate(m.u0, p, cfg);
  row.stop_reason = res.stop_reason;
  row.t_stop = res.t_stop;
  row.max_energy_drift = res.max_energy_drift;
  row.censored = !res.blew_up();
  if (res.stop_reason == StopReason::blowup_slope) row.t_star = extrapolate_blowup_time(res.slope_trace);
  return row;
}

/// Runs every member, extrapolates its blow-up time and tabulates it against
/// the lower bound. Rows come back in member order.
template <typename Scalar>
SharpnessTable<Scalar> sharpness_experiment(const std::vector<FamilyMember<Scalar>>& family,
                                            const PdeParams<Scalar>& p, const SolverConfig& cfg,
                                            const SharpnessOptions& opt = {}) {
  if (p.global_regime()) throw std::invalid_argument("sharpness experiment needs gamma != 0");
  cfg.validate();
  SharpnessTable<Scalar> table;
  table.tolerance = opt.tolerance;
  table.rows.resize(family.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < family.size(); i = next++) {
      try {
        table.rows[i] = run_member(i, family[i], p, cfg, opt);
      } catch (const std::exception& e) {
        table.rows[i].member = i;
        table.rows[i].alpha = family[i].alpha;
        table.rows[i].error = e.what();
      }
    }
  };
  unsigned workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(family.size(), 1)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return table;
}

}  // namespace nlwave
