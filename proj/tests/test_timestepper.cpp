#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlwave/timestepper.hpp"
#include "test_support.hpp"

using namespace nlwave;
using nlwave::testing::Field;
using nlwave::testing::max_abs_diff;
using G = nlwave::testing::Grid;
using Params = PdeParams<double>;

constexpr double pi = std::numbers::pi;

namespace {

Field gaussian(const G& grid, double amplitude, double width = 1.0, double center = 0.0) {
  return Field::sample(grid, [&](double x) {
    const double z = (x - center) / width;
    return amplitude * std::exp(-z * z);
  });
}

// Fixed-step integration with step_rk4 only.
Field integrate_fixed(Field u, double t_end, int steps, const Params& p) {
  const double dt = t_end / steps;
  for (int s = 0; s < steps; ++s) u = step_rk4(u, dt, p);
  return u;
}

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dt_min = 1.0;
  cfg.dt_init = 0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.cfl_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.t_end = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.checkpoint_times = {2.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("step_rk4 keeps zero fixed") {
  const G grid(10.0, 64);
  const auto z = Field::zero(grid);
  for (double dt : {1e-3, 0.1, 5.0}) CHECK(max_abs(step_rk4(z, dt, Params(2, 1))) == 0.0);
  CHECK_THROWS_AS(step_rk4(z, 0.0, Params(1, 0)), std::invalid_argument);
}

TEST_CASE("small-amplitude modes travel with the linear phase speed 2 omega / (1 + k^2)") {
  const double L = 4 * pi;
  const G grid(L, 64);
  const double amp = 1e-6;
  for (const Params p : {Params(1, 1), Params(-2, 0.5), Params(0, 2)}) {
    for (int j : {1, 3}) {
      const double k = pi * j / L;
      const double c = 2 * p.omega / (1 + k * k);
      const auto u0 = Field::sample(grid, [&](double x) { return amp * std::cos(k * x); });
      const auto u1 = integrate_fixed(u0, 1.0, 200, p);
      const auto exact = Field::sample(grid, [&](double x) { return amp * std::cos(k * (x - c)); });
      CHECK(max_abs_diff(u1, exact) / amp <= 1e-6);
    }
  }
}

TEST_CASE("RK4 is fourth order in time") {
  const G grid(20.0, 256);
  const Params p(1.0, 0.5);
  const auto u0 = gaussian(grid, 1.0);
  const double T = 1.0;
  const auto ref = integrate_fixed(u0, T, 160, p);
  const double e1 = max_abs_diff(integrate_fixed(u0, T, 10, p), ref);
  const double e2 = max_abs_diff(integrate_fixed(u0, T, 20, p), ref);
  MESSAGE("error ratio ", e1 / e2);
  CHECK(e1 / e2 >= 16 * 0.8);
  CHECK(e1 / e2 <= 16 * 1.2);
}

TEST_CASE("simulate: zero data reaches t_end with zero traces") {
  const G grid(10.0, 64);
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.sample_interval = 0.25;
  const auto res = simulate(Field::zero(grid), Params(1, 0.5), cfg);
  CHECK(res.stop_reason == StopReason::reached_t_end);
  CHECK(res.t_stop == doctest::Approx(1.0));
  REQUIRE(res.samples.size() == 5);
  for (const auto& s : res.samples) {
    CHECK(s.energy == 0.0);
    CHECK(s.m == 0.0);
    CHECK(s.max_u == 0.0);
  }
  for (std::size_t i = 1; i < res.samples.size(); ++i) {
    CHECK(res.samples[i].t > res.samples[i - 1].t);
    CHECK(res.samples[i].t == doctest::Approx(0.25 * static_cast<double>(i)));
  }
}

TEST_CASE("simulate rejects data that does not decay at the boundary") {
  const G grid(5.0, 64);
  SolverConfig cfg;
  const auto wide = gaussian(grid, 1.0, 3.0);
  CHECK_THROWS_AS(simulate(wide, Params(1, 0), cfg), std::invalid_argument);
}

TEST_CASE("energy is conserved and the solution stays uniformly bounded") {
  const double L = 20.0;
  const G grid(L, 512);
  const Params p(1.0, 0.5);
  SolverConfig cfg;
  cfg.t_end = 4.0;
  cfg.sample_interval = 0.1;
  cfg.cfl_fraction = 0.4;
  cfg.dt_init = 0.02;
  const auto u0 = gaussian(grid, 0.5, 1.5);
  const double e0 = energy(u0).energy;
  double worst_ratio = 0;
  const auto res = simulate(u0, p, cfg, [&](double, const Field& u) {
    const double m = max_abs(u);
    worst_ratio = std::max(worst_ratio, m * m / (e0 * (0.5 + 0.5 / std::tanh(L))));
  });
  CHECK(res.stop_reason == StopReason::reached_t_end);
  CHECK(res.max_energy_drift <= cfg.energy_drift_tol);
  for (const auto& w : res.warnings) CHECK(w.find("energy drift") == std::string::npos);
  CHECK(worst_ratio <= 1.0);
  for (std::size_t i = 1; i < res.energy_trace.size(); ++i)
    CHECK(res.energy_trace[i].t > res.energy_trace[i - 1].t);
}

TEST_CASE("time-step refinement barely moves the final state") {
  const G grid(20.0, 256);
  const Params p(1.0, 0.5);
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.sample_interval = 0.5;
  cfg.dt_init = 0.01;
  const auto u0 = gaussian(grid, 0.5);
  const auto a = simulate(u0, p, cfg);
  cfg.dt_init = 0.005;
  const auto b = simulate(u0, p, cfg);
  CHECK(std::abs(l2_norm(*a.final_state) - l2_norm(*b.final_state)) <= 1e-8);
}

TEST_CASE("gamma = 0 runs are global") {
  const G grid(15.0, 256);
  SolverConfig cfg;
  cfg.t_end = 20.0;
  cfg.sample_interval = 1.0;
  cfg.dt_init = 0.05;
  cfg.blowup_m_threshold = 10;
  const auto res = simulate(gaussian(grid, 2.0, 0.5), Params(0.0, 0.5), cfg);
  CHECK(res.stop_reason == StopReason::reached_t_end);
  for (const auto& s : res.slope_trace) CHECK(s.m == 0.0);
}

TEST_CASE("steep data with gamma = 1 blows up through the slope criterion") {
  const G grid(10.0, 8192);
  SolverConfig cfg;
  cfg.t_end = 5.0;
  cfg.sample_interval = 0.05;
  cfg.dt_init = 0.01;
  // Kept inside the range of slopes the grid resolves.
  cfg.blowup_m_threshold = 8;
  // The front of a narrow pulse steepens; m(t) runs off to -infinity.
  const auto u0 = Field::sample(grid, [](double x) { return 1.0 / std::pow(std::cosh(x / 0.3), 2); });
  const auto res = simulate(u0, Params(1.0, 0.0), cfg);
  REQUIRE(res.stop_reason == StopReason::blowup_slope);
  CHECK(res.max_energy_drift <= cfg.energy_drift_tol);
  CHECK(res.slope_trace.back().m <= -cfg.blowup_m_threshold);
  CHECK(res.t_stop <= cfg.t_end);
  REQUIRE(res.slope_trace.size() >= 10);
  for (std::size_t i = res.slope_trace.size() - 9; i < res.slope_trace.size(); ++i)
    CHECK(res.slope_trace[i].m < res.slope_trace[i - 1].m);
  for (std::size_t i = 1; i < res.slope_trace.size(); ++i)
    CHECK(res.slope_trace[i].t > res.slope_trace[i - 1].t);
  const auto t_star = extrapolate_blowup_time(res.slope_trace);
  REQUIRE(t_star.has_value());
  CHECK(*t_star >= res.t_stop);
  CHECK(*t_star <= res.t_stop + 4.0 / cfg.blowup_m_threshold);
}

TEST_CASE("non-finite blow-up is its own verdict") {
  const G grid(10.0, 64);
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.blowup_m_threshold = 1e300;
  cfg.dt_min = 1e-200;
  const auto huge = gaussian(grid, 1e160);
  CHECK_THROWS_AS(step_rk4(huge, 1e-3, Params(1, 0)), NonFiniteError);
  const auto res = simulate(huge, Params(1, 0), cfg);
  CHECK(res.stop_reason == StopReason::blowup_nonfinite);
  CHECK(res.blew_up());
}

TEST_CASE("step control underflow is reported separately from blow-up") {
  const G grid(10.0, 64);
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt_init = 0.1;
  cfg.dt_min = 0.05;
  cfg.cfl_fraction = 0.01;
  const auto res = simulate(gaussian(grid, 1.0), Params(1, 0), cfg);
  CHECK(res.stop_reason == StopReason::dt_underflow);
  CHECK_FALSE(res.blew_up());
}

TEST_CASE("checkpoints and observer") {
  const G grid(10.0, 64);
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.sample_interval = 0.25;
  cfg.checkpoint_times = {0.0, 0.5};
  int calls = 0;
  const auto res = simulate(gaussian(grid, 0.1), Params(1, 0.5), cfg,
                            [&](double, const Field&) { ++calls; });
  CHECK(calls == 5);
  REQUIRE(res.checkpoints.size() == 2);
  CHECK(res.checkpoints[0].t == 0.0);
  CHECK(res.checkpoints[1].t == doctest::Approx(0.5));
}

TEST_CASE("blow-up time extrapolation on an exact Riccati history") {
  const double t_star = 1.75;
  std::vector<SlopeSample<double>> hist;
  for (int i = 0; i < 40; ++i) {
    const double t = 1.0 + 0.7 * (1 - std::pow(0.9, i));
    hist.push_back({t, -2.0 / (t_star - t), 0.0, 0, 0.0});
  }
  const auto est = extrapolate_blowup_time(hist);
  REQUIRE(est.has_value());
  CHECK(*est == doctest::Approx(t_star).epsilon(1e-12));
  CHECK_FALSE(extrapolate_blowup_time(std::vector<SlopeSample<double>>{}).has_value());
  hist.back().m = 1.0;
  CHECK_FALSE(extrapolate_blowup_time(hist).has_value());
}

TEST_CASE("continuous dependence on the initial data") {
  const G grid(15.0, 256);
  const Params p(1.0, 0.5);
  SolverConfig cfg;
  cfg.t_end = 2.0;
  cfg.sample_interval = 1.0;
  const auto u0 = gaussian(grid, 0.5);
  const auto d0 = continuous_dependence_probe(u0, 0.0, p, cfg);
  REQUIRE(d0.has_value());
  CHECK(*d0 == 0.0);
  std::vector<double> d;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    const auto r = continuous_dependence_probe(u0, delta, p, cfg);
    REQUIRE(r.has_value());
    d.push_back(*r);
  }
  CHECK(d[0] > d[1]);
  CHECK(d[1] > d[2]);
  for (int i = 0; i < 2; ++i) {
    const double ratio = d[i] / d[i + 1];
    CHECK(ratio >= 10.0 / 3);
    CHECK(ratio <= 30.0);
  }

  SolverConfig blow = cfg;
  blow.blowup_m_threshold = 3;
  const auto steep = Field::sample(grid, [](double x) { return 1.0 / std::pow(std::cosh(x / 0.3), 2); });
  CHECK_FALSE(continuous_dependence_probe(steep, 1e-3, Params(1, 0), blow).has_value());
}
