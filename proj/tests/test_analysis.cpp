#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlwave/analysis.hpp"
#include "test_support.hpp"

using namespace nlwave;
using nlwave::testing::Field;
using nlwave::testing::random_smooth_field;
using nlwave::testing::uniform;
using G = nlwave::testing::Grid;
using Params = PdeParams<double>;

constexpr double pi = std::numbers::pi;

namespace {

Field sech2(const G& grid, double amplitude, double width) {
  return Field::sample(grid, [&](double x) { return amplitude / std::pow(std::cosh(x / width), 2); });
}

}  // namespace

TEST_CASE("gamma case selection") {
  CHECK(gamma_case(0.0) == GammaCase::zero);
  CHECK(gamma_case(0.5) == GammaCase::low);
  CHECK(gamma_case(1.4999) == GammaCase::low);
  CHECK(gamma_case(1.5) == GammaCase::mid);
  CHECK(gamma_case(3.0) == GammaCase::mid);
  CHECK(gamma_case(3.0001) == GammaCase::high_or_neg);
  CHECK(gamma_case(-0.1) == GammaCase::high_or_neg);
  CHECK(std::string(to_string(GammaCase::high_or_neg)) == "high_or_neg");
}

TEST_CASE("worked lower-bound values") {
  // gamma = 1, omega = 0, E0 = 1, m0 = -2: K = 1, T = 2 atan(1/2).
  const auto b1 = existence_bound(1.0, -2.0, Params(1, 0));
  CHECK(b1.gamma_case == GammaCase::low);
  CHECK(b1.K == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(b1.T_lower - 0.9272952) <= 1e-6);
  CHECK(std::abs(b1.T_lower - 2 * std::atan(0.5)) <= 1e-15);
  CHECK(std::abs(b1.T_lower - 2 * (pi / 2 + std::atan(-2.0))) <= 1e-12);

  // gamma = 2, omega = 0, E0 = 1, m0 = -3: mid case, K = 2.
  // Reference values from 30-digit evaluation of the closed forms (mpmath).
  const auto b2 = existence_bound(1.0, -3.0, Params(2, 0));
  CHECK(b2.gamma_case == GammaCase::mid);
  CHECK(b2.K == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(b2.T_lower - 0.622976153991208607) <= 1e-12);

  // gamma = 1, omega = 0.5, E0 = 1: -sqrt(1 + 2 sqrt2).
  CHECK(std::abs(blowup_threshold(1.0, 0.5, 1.0) - (-1.95663668695703191)) <= 1e-12);
  CHECK(std::abs(blowup_threshold(1.0, 0.5, 1.0) + std::sqrt(1 + 2 * std::sqrt(2.0))) <= 1e-15);
  CHECK(blowup_threshold(1.0, 0.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("bracket coefficients per case") {
  const double e0 = 2.5, w = 0.3;
  const double lin = 4 * std::sqrt(2.0) * w * std::sqrt(e0);
  CHECK(bound_bracket(0.5, w, e0) == doctest::Approx(2.5 * 0.5 / 2 * e0 + lin * 0.5));
  CHECK(bound_bracket(2.0, w, e0) == doctest::Approx(2.0 * e0 + lin * 2));
  CHECK(bound_bracket(4.0, w, e0) == doctest::Approx(5.0 * 4 / 2 * e0 + lin * 4));
  CHECK(bound_bracket(-1.0, w, e0) == doctest::Approx(5.0 / 2 * e0 + lin));
  for (double g : {0.3, 1.0, 2.0, 3.5, -0.7, -4.0}) CHECK(bound_bracket(g, w, e0) > 0);
}

TEST_CASE("case boundaries are continuous") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const double e0 = uniform(rng, 0.01, 10), w = uniform(rng, 0, 2), m0 = uniform(rng, -10, 2);
    for (auto [g, left, right] : {std::tuple{1.5, GammaCase::low, GammaCase::mid},
                                  std::tuple{3.0, GammaCase::mid, GammaCase::high_or_neg}}) {
      const double kl = bound_bracket(left, g, w, e0), kr = bound_bracket(right, g, w, e0);
      CHECK(std::abs(kl - kr) <= 1e-12 * std::max(1.0, kl));
      CHECK(std::abs(lower_bound_time(kl, m0) - lower_bound_time(kr, m0)) <= 1e-12);
    }
  }
  // Exact coefficients at the boundaries: 9/8 at gamma = 3/2, 9/2 at gamma = 3.
  CHECK(bound_bracket(GammaCase::low, 1.5, 0.0, 1.0) == 9.0 / 8);
  CHECK(bound_bracket(GammaCase::mid, 1.5, 0.0, 1.0) == 9.0 / 8);
  CHECK(bound_bracket(GammaCase::mid, 3.0, 0.0, 1.0) == 9.0 / 2);
  CHECK(bound_bracket(GammaCase::high_or_neg, 3.0, 0.0, 1.0) == 9.0 / 2);
}

TEST_CASE("arctan forms agree for negative slopes") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const double K = std::exp(uniform(rng, std::log(0.01), std::log(100.0)));
    const double m0 = -std::exp(uniform(rng, std::log(0.01), std::log(100.0)));
    CHECK(std::abs(lower_bound_time(K, m0) - lower_bound_time_negative_slope(K, m0)) <= 1e-12);
  }
  CHECK_THROWS_AS(lower_bound_time_negative_slope(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lower_bound_time_negative_slope(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("extension to nonnegative slopes") {
  // m0 = 0 gives half the Riccati period; the bound stays continuous through 0.
  CHECK(lower_bound_time(4.0, 0.0) == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(std::abs(lower_bound_time(4.0, 1e-9) - lower_bound_time(4.0, -1e-9)) <= 1e-8);
  CHECK(lower_bound_time(4.0, 5.0) > lower_bound_time(4.0, 0.0));
  CHECK(lower_bound_time(4.0, 5.0) < pi);
}

TEST_CASE("bound is increasing in m0 and decreasing in K") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const double K = uniform(rng, 0.05, 20), m0 = uniform(rng, -20, 5), dm = uniform(rng, 1e-3, 1), dk = uniform(rng, 1e-3, 1);
    CHECK(lower_bound_time(K, m0 + dm) > lower_bound_time(K, m0));
    CHECK(lower_bound_time(K + dk, m0) < lower_bound_time(K, m0));
  }
}

TEST_CASE("global regime and zero energy give an infinite bound") {
  const auto z = existence_bound(3.0, -5.0, Params(0, 1));
  CHECK(z.gamma_case == GammaCase::zero);
  CHECK(std::isinf(z.T_lower));
  CHECK(std::isinf(existence_bound(0.0, 0.0, Params(1, 0.5)).T_lower));

  const G grid(10, 128);
  const auto zero_bound = existence_bound(Field::zero(grid), Params(2, 0.5));
  CHECK(zero_bound.E0 == 0.0);
  CHECK(std::isinf(zero_bound.T_lower));
  CHECK(std::isinf(lower_bound_time(0.0, -1.0)));
}

TEST_CASE("bound from a field uses the grid energy and grid slope") {
  const G grid(20, 512);
  const auto u = random_smooth_field(grid, 5);
  const Params p(1.2, 0.4);
  const auto b = existence_bound(u, p);
  CHECK(b.E0 == energy(u).energy);
  CHECK(b.m0 == slope_sample(u, p).m);
  CHECK(b.T_lower == lower_bound_time(bound_bracket(1.2, 0.4, b.E0), b.m0));
}

TEST_CASE("scaling data shortens the bound") {
  // omega = 0: K scales like alpha^2 and m0 like alpha, so T ~ 1/alpha.
  const G grid(20, 512);
  const auto u = random_smooth_field(grid, 8);
  const Params p(1, 0);
  const double t1 = existence_bound(u, p).T_lower;
  double prev = t1;
  for (double alpha : {1.5, 2.0, 4.0}) {
    const double t = existence_bound(alpha * u, p).T_lower;
    CHECK(t < prev);
    CHECK(t == doctest::Approx(t1 / alpha).epsilon(1e-12));
    prev = t;
  }
}

TEST_CASE("blowup condition") {
  const G grid(10, 1024);
  const auto zero = blowup_condition(Field::zero(grid), Params(1, 0.5));
  CHECK(zero.threshold == 0.0);
  CHECK_FALSE(zero.triggered);
  CHECK_FALSE(zero.witness_x0.has_value());

  CHECK_THROWS_AS(blowup_condition(Field::zero(grid), Params(0, 0.5)), std::invalid_argument);

  // Normalize a steep pulse to E0 = 1 with gamma = 1, omega = 0: threshold -1.
  const auto shape = sech2(grid, 1.0, 0.1);
  const auto u = (1.0 / std::sqrt(energy(shape).energy)) * shape;
  const auto v = blowup_condition(u, Params(1, 0));
  CHECK(v.E0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v.threshold == doctest::Approx(-1.0).epsilon(1e-14));
  const double m0 = slope_sample(u, Params(1, 0)).m;
  REQUIRE(m0 < -1.5);
  CHECK(v.triggered);
  REQUIRE(v.witness_index.has_value());
  CHECK(*v.witness_x0 == grid.x(*v.witness_index));
  CHECK(*v.witness_x0 > 0);  // steepest descent on the front side

  // A wide, low pulse does not trigger.
  const auto flat = sech2(grid, 0.1, 3.0);
  CHECK_FALSE(blowup_condition(flat, Params(1, 0)).triggered);
}

TEST_CASE("criterion (i) implies m0 below -sqrt of the absolute bracket") {
  std::mt19937_64 rng(99);
  const G grid(20, 512);
  int triggered = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const double g = uniform(rng, -3, 5), w = uniform(rng, 0, 1);
    if (g == 0) continue;
    const Params p(g, w);
    const auto u = random_smooth_field(grid, 1000 + trial, uniform(rng, 0.1, 4));
    const auto v = blowup_condition(u, p);
    const double e0 = energy(u).energy;
    const double kprime = std::abs((g - 3) * g) / 2 * e0 + 4 * std::sqrt(2.0) * w * std::abs(g) * std::sqrt(e0);
    const double m0 = slope_sample(u, p).m;
    CHECK(v.triggered == (m0 < -std::sqrt(kprime)));
    if (v.triggered) {
      ++triggered;
      CHECK(m0 < -std::sqrt(kprime));
    }
  }
  CHECK(triggered > 0);
}

TEST_CASE("sharpness experiment: ordering, censoring and determinism") {
  const G grid(20, 256);
  const Params p(1, 0.2);
  std::vector<FamilyMember<double>> family;
  for (double alpha : {0.5, 1.0, 2.0}) family.push_back({alpha, alpha * random_smooth_field(grid, 4)});
  SolverConfig cfg;
  cfg.t_end = 0.2;
  cfg.sample_interval = 0.05;
  const auto serial = sharpness_experiment(family, p, cfg);
  SharpnessOptions par;
  par.workers = 3;
  const auto parallel = sharpness_experiment(family, p, cfg, par);
  REQUIRE(serial.rows.size() == 3);
  REQUIRE(parallel.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(serial.rows[i].member == i);
    CHECK(parallel.rows[i].member == i);
    CHECK(serial.rows[i].alpha == family[i].alpha);
    CHECK(serial.rows[i].bound.T_lower == parallel.rows[i].bound.T_lower);
    CHECK(serial.rows[i].t_stop == parallel.rows[i].t_stop);
    CHECK(serial.rows[i].censored);
    CHECK_FALSE(serial.rows[i].ratio().has_value());
  }
  CHECK(serial.rows[1].bound.T_lower < serial.rows[0].bound.T_lower);
  CHECK(serial.rows[2].bound.T_lower < serial.rows[1].bound.T_lower);
  CHECK(serial.bound_respected());

  CHECK_THROWS_AS(sharpness_experiment(family, Params(0, 0.2), cfg), std::invalid_argument);
}

TEST_CASE("sharpness experiment records a failing member without losing the rest") {
  const G grid(10, 128);
  std::vector<FamilyMember<double>> family;
  family.push_back({1.0, sech2(grid, 0.2, 0.5)});
  family.push_back({2.0, Field::sample(grid, [](double) { return 1.0; })});
  SolverConfig cfg;
  cfg.t_end = 0.1;
  const auto table = sharpness_experiment(family, Params(1, 0), cfg);
  CHECK_FALSE(table.rows[0].error.has_value());
  REQUIRE(table.rows[1].error.has_value());
  CHECK(table.rows[1].error->find("decay") != std::string::npos);
}

TEST_CASE("steep member blows up no earlier than the bound") {
  const G grid(10, 8192);
  std::vector<FamilyMember<double>> family{{0.3, sech2(grid, 1.0, 0.3)}};
  SolverConfig cfg;
  cfg.t_end = 5;
  cfg.sample_interval = 0.05;
  SharpnessOptions opt;
  // sech^2(x/w) has m0 = -4/(3 sqrt3 w); stop near m = -3.6/w, which this grid resolves.
  opt.threshold_factor = 4.68;
  const auto table = sharpness_experiment(family, Params(1, 0), cfg, opt);
  const auto& row = table.rows[0];
  REQUIRE(row.stop_reason == StopReason::blowup_slope);
  REQUIRE(row.ratio().has_value());
  CHECK(*row.ratio() >= 0.98);
  CHECK(table.bound_respected());
  CHECK(row.max_energy_drift <= 1e-5);
}
