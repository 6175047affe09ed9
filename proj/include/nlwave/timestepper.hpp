#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <vector>

#include "nlwave/model.hpp"

namespace nlwave {

struct SolverConfig {
  /// Initial step, and the ceiling for every later step.
  double dt_init = 1e-2;
  double dt_min = 1e-10;
  double t_end = 1.0;
  double cfl_fraction = 0.5;
  /// Blow-up is declared once m(t) <= -blowup_m_threshold.
  double blowup_m_threshold = 1e6;
  double energy_drift_tol = 1e-5;
  double sample_interval = 0.1;
  /// Initial data must satisfy max boundary |u0| <= decay_tolerance * max |u0|.
  double decay_tolerance = 1e-8;
  /// Mid-run boundary level (relative to max |u|) that triggers a warning.
  double contamination_tolerance = 1e-6;
  /// Times at which full fields are kept in the result.
  std::vector<double> checkpoint_times;
  /// Per-step slope samples retained for blow-up-time extrapolation.
  std::size_t tail_capacity = 256;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(dt_init, "dt_init");
    positive(dt_min, "dt_min");
    positive(t_end, "t_end");
    positive(blowup_m_threshold, "blowup_m_threshold");
    positive(energy_drift_tol, "energy_drift_tol");
    positive(sample_interval, "sample_interval");
    positive(decay_tolerance, "decay_tolerance");
    positive(contamination_tolerance, "contamination_tolerance");
    if (dt_min > dt_init) throw std::invalid_argument("dt_min must not exceed dt_init");
    if (!(cfl_fraction > 0 && cfl_fraction <= 1))
      throw std::invalid_argument("cfl_fraction must lie in (0, 1]");
    for (double t : checkpoint_times)
      if (!(t >= 0 && t <= t_end)) throw std::invalid_argument("checkpoint times must lie in [0, t_end]");
  }
};

enum class StopReason { reached_t_end, blowup_slope, blowup_nonfinite, dt_underflow };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::reached_t_end: return "reached_t_end";
    case StopReason::blowup_slope: return "blowup_slope";
    case StopReason::blowup_nonfinite: return "blowup_nonfinite";
    case StopReason::dt_underflow: return "dt_underflow";
  }
  return "unknown";
}

template <typename Scalar>
struct SampleSummary {
  Scalar t{0};
  Scalar energy{0};
  Scalar m{0};
  Scalar xi{0};
  Scalar max_u{0};
  /// Step that led to this sample (0 for the initial record).
  Scalar dt{0};
};

template <typename Scalar>
struct Checkpoint {
  Scalar t;
  StateField<Scalar> field;
};

template <typename Scalar>
struct SimulationResult {
  std::vector<SampleSummary<Scalar>> samples;
  std::vector<EnergySample<Scalar>> energy_trace;
  /// Sample-time slope records; on slope blow-up the per-step tail is appended.
  std::vector<SlopeSample<Scalar>> slope_trace;
  /// The last tail_capacity per-step slope samples.
  std::vector<SlopeSample<Scalar>> step_tail;
  std::vector<Checkpoint<Scalar>> checkpoints;
  std::optional<StateField<Scalar>> final_state;
  StopReason stop_reason = StopReason::reached_t_end;
  Scalar t_stop{0};
  std::size_t steps = 0;
  Scalar max_energy_drift{0};
  std::vector<std::string> warnings;

  bool blew_up() const {
    return stop_reason == StopReason::blowup_slope || stop_reason == StopReason::blowup_nonfinite;
  }
};

/// Called at every recorded sample with (t, u).
template <typename Scalar>
using SampleObserver = std::function<void(Scalar, const StateField<Scalar>&)>;

/// One classical Runge-Kutta step of u_t = rhs_nonlocal(u). Throws NonFiniteError
/// if any stage goes non-finite.
template <typename Scalar>
StateField<Scalar> step_rk4(const StateField<Scalar>& u, Scalar dt, const PdeParams<Scalar>& p) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("step_rk4 needs dt > 0");
  const auto k1 = rhs_nonlocal(u, p);
  const auto k2 = rhs_nonlocal(u + (dt / Scalar(2)) * k1, p);
  const auto k3 = rhs_nonlocal(u + (dt / Scalar(2)) * k2, p);
  const auto k4 = rhs_nonlocal(u + dt * k3, p);
  Vector<Scalar> next =
      u.values() + (dt / Scalar(6)) * (k1.values() + Scalar(2) * (k2.values() + k3.values()) + k4.values());
  require_finite(next, "step_rk4");
  return StateField<Scalar>(u.grid(), std::move(next));
}

/// Step size from the transport speed |gamma| max|u| + 2 omega, capped by
/// dt_init and by 0.5/|m| so the Riccati collapse of m(t) is resolved.
template <typename Scalar>
Scalar stable_step(const StateField<Scalar>& u, const PdeParams<Scalar>& p, Scalar m,
                   const SolverConfig& cfg) {
  const Scalar speed = std::abs(p.gamma) * max_abs(u) + Scalar(2) * p.omega;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar dt = static_cast<Scalar>(cfg.cfl_fraction) * u.grid().spacing() / std::max(speed, eps);
  dt = std::min(dt, static_cast<Scalar>(cfg.dt_init));
  if (m < Scalar(0)) dt = std::min(dt, Scalar(0.5) / -m);
  return dt;
}

/// Zero crossing of a least-squares line through -2/m(t) over the tail of a
/// blowing-up slope history. Under m' ~ -m^2/2 this quantity decreases with
/// unit slope and vanishes at the blow-up time.
template <typename Scalar>
std::optional<Scalar> extrapolate_blowup_time(const std::vector<SlopeSample<Scalar>>& history) {
  if (history.size() < 3) return std::nullopt;
  const Scalar m_last = history.back().m;
  if (!(m_last < Scalar(0))) return std::nullopt;

  std::vector<const SlopeSample<Scalar>*> pts;
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (!(it->m < Scalar(0)) || std::abs(it->m) < std::abs(m_last) / Scalar(4)) break;
    pts.push_back(&*it);
  }
  if (pts.size() < 3) {
    pts.clear();
    for (auto it = history.rbegin(); it != history.rend() && pts.size() < 3; ++it) {
      if (!(it->m < Scalar(0))) break;
      pts.push_back(&*it);
    }
  }
  if (pts.size() < 2) return std::nullopt;

  Scalar st = 0, sz = 0, stt = 0, stz = 0;
  for (const auto* s : pts) {
    const Scalar z = Scalar(-2) / s->m;
    st += s->t;
    sz += z;
    stt += s->t * s->t;
    stz += s->t * z;
  }
  const auto n = static_cast<Scalar>(pts.size());
  const Scalar denom = n * stt - st * st;
  if (denom == Scalar(0)) return std::nullopt;
  const Scalar slope = (n * stz - st * sz) / denom;
  const Scalar intercept = (sz - slope * st) / n;
  if (!(slope < Scalar(0))) return std::nullopt;
  return -intercept / slope;
}

/// Integrates u_t = rhs_nonlocal(u) from u0 until t_end, slope blow-up,
/// non-finite blow-up or step underflow.
template <typename Scalar>
SimulationResult<Scalar> simulate(const StateField<Scalar>& u0, const PdeParams<Scalar>& p,
                                  const SolverConfig& cfg,
                                  const std::type_identity_t<SampleObserver<Scalar>>& observer = {}) {
  cfg.validate();
  require_finite(u0.values(), "initial data");
  const Scalar peak0 = max_abs(u0);
  if (peak0 > Scalar(0) && boundary_magnitude(u0) > static_cast<Scalar>(cfg.decay_tolerance) * peak0)
    throw std::invalid_argument("initial data does not decay at the box boundary: |u0(+-L)| = " +
                                std::to_string(static_cast<double>(boundary_magnitude(u0))) +
                                " exceeds decay tolerance " + std::to_string(cfg.decay_tolerance) +
                                " relative to max |u0|");

  SimulationResult<Scalar> res;
  const Scalar t_end = static_cast<Scalar>(cfg.t_end);
  const Scalar interval = static_cast<Scalar>(cfg.sample_interval);
  const Scalar threshold = static_cast<Scalar>(cfg.blowup_m_threshold);

  std::vector<Scalar> checkpoints(cfg.checkpoint_times.begin(), cfg.checkpoint_times.end());
  std::sort(checkpoints.begin(), checkpoints.end());
  std::size_t next_checkpoint = 0;

  StateField<Scalar> u = u0;
  Scalar t = 0;
  const Scalar e0 = energy(u0).energy;
  bool contamination_reported = false;
  std::deque<SlopeSample<Scalar>> tail;

  auto record = [&](const SlopeSample<Scalar>& slope, Scalar dt) {
    const auto e = energy(u, t);
    res.energy_trace.push_back(e);
    res.slope_trace.push_back(slope);
    res.samples.push_back({t, e.energy, slope.m, slope.xi, max_abs(u), dt});
    if (e0 > Scalar(0))
      res.max_energy_drift = std::max(res.max_energy_drift, std::abs(e.energy - e0) / e0);
    if (observer) observer(t, u);
    if (!contamination_reported) {
      const Scalar peak = max_abs(u);
      if (peak > Scalar(0) &&
          boundary_magnitude(u) > static_cast<Scalar>(cfg.contamination_tolerance) * peak) {
        contamination_reported = true;
        res.warnings.push_back("boundary contamination above " +
                               std::to_string(cfg.contamination_tolerance) +
                               " of max amplitude at t = " + std::to_string(static_cast<double>(t)));
      }
    }
  };
  auto take_checkpoints = [&] {
    while (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] <= t) {
      res.checkpoints.push_back({t, u});
      ++next_checkpoint;
    }
  };

  SlopeSample<Scalar> slope = slope_sample(u, p, t);
  record(slope, Scalar(0));
  take_checkpoints();
  tail.push_back(slope);

  std::size_t sample_index = 1;
  Scalar last_dt = 0;
  Scalar last_recorded_t = 0;
  res.stop_reason = StopReason::reached_t_end;

  while (true) {
    if (slope.m <= -threshold) {
      res.stop_reason = StopReason::blowup_slope;
      break;
    }
    if (t >= t_end) break;

    Scalar dt = stable_step(u, p, slope.m, cfg);
    if (dt < static_cast<Scalar>(cfg.dt_min)) {
      res.stop_reason = StopReason::dt_underflow;
      break;
    }
    const Scalar next_sample = std::min(t_end, static_cast<Scalar>(sample_index) * interval);
    // Land exactly on sample times without taking a sliver step: the last
    // two steps before a sample share the remaining interval.
    bool lands_on_sample = false;
    const Scalar remaining = next_sample - t;
    if (dt >= remaining) {
      dt = remaining;
      lands_on_sample = true;
    } else if (Scalar(2) * dt > remaining) {
      dt = remaining / Scalar(2);
    }

    try {
      u = step_rk4(u, dt, p);
    } catch (const NonFiniteError&) {
      res.stop_reason = StopReason::blowup_nonfinite;
      break;
    }
    t = lands_on_sample ? next_sample : t + dt;
    last_dt = dt;
    ++res.steps;

    try {
      slope = slope_sample(u, p, t);
    } catch (const NonFiniteError&) {
      res.stop_reason = StopReason::blowup_nonfinite;
      break;
    }
    tail.push_back(slope);
    if (tail.size() > cfg.tail_capacity) tail.pop_front();

    if (lands_on_sample) {
      record(slope, dt);
      last_recorded_t = t;
      while (static_cast<Scalar>(sample_index) * interval <= t) ++sample_index;
    }
    take_checkpoints();
  }

  // Close the traces with the stopping state, and on slope blow-up keep the
  // fine-grained approach to the singularity.
  if (res.stop_reason == StopReason::blowup_slope) {
    for (const auto& s : tail)
      if (s.t > last_recorded_t) res.slope_trace.push_back(s);
    const auto e = energy(u, t);
    res.energy_trace.push_back(e);
    res.samples.push_back({t, e.energy, slope.m, slope.xi, max_abs(u), last_dt});
    if (observer) observer(t, u);
  } else if (res.stop_reason != StopReason::reached_t_end && t > last_recorded_t) {
    record(slope, last_dt);
  }
  res.step_tail.assign(tail.begin(), tail.end());
  res.t_stop = t;
  res.final_state = u;
  if (res.max_energy_drift > static_cast<Scalar>(cfg.energy_drift_tol))
    res.warnings.push_back("relative energy drift " + std::to_string(static_cast<double>(res.max_energy_drift)) +
                           " exceeds tolerance " + std::to_string(cfg.energy_drift_tol));
  return res;
}

/// Fixed smooth perturbation direction used by the continuous-dependence probe.
template <typename Scalar>
StateField<Scalar> probe_bump(const Grid<Scalar>& grid) {
  return StateField<Scalar>::sample(grid, [](Scalar x) { return std::exp(-(x - Scalar(0.5)) * (x - Scalar(0.5))); });
}

/// H^1 distance at t_end between the solutions from u0 and u0 + delta * bump.
/// Empty when either run fails to reach t_end.
template <typename Scalar>
std::optional<Scalar> continuous_dependence_probe(const StateField<Scalar>& u0, Scalar delta,
                                                  const PdeParams<Scalar>& p, const SolverConfig& cfg) {
  if (!(delta >= Scalar(0))) throw std::invalid_argument("delta must be nonnegative");
  const auto base = simulate(u0, p, cfg);
  const auto pert = simulate(u0 + delta * probe_bump(u0.grid()), p, cfg);
  if (base.stop_reason != StopReason::reached_t_end || pert.stop_reason != StopReason::reached_t_end)
    return std::nullopt;
  return hs_norm(*pert.final_state - *base.final_state, SobolevIndex(1.0));
}

}  // namespace nlwave
