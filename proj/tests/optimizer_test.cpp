#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "comc/optimizer.hpp"

using namespace comc;

namespace {

merge_inputs scenario(double q_main_vph, double q_ramp_vph) {
  merge_inputs in;
  in.state_o = demand_state(units::vph(q_main_vph), in.fd.v_free);
  in.lambda = units::vph(q_ramp_vph);
  return in;
}

struct bounds_row {
  double q_main, q_ramp;
  int n;
  double v_c_kmh;
  double lb_mean, ub, lb_tight;
};

// Reference intervals at the six operating points, for both gap rules.  The
// upper bound does not depend on the rule.
const bounds_row kBoundsRows[] = {
    {1600.0, 300.0, 4, 96.67, 461.733819, 623.923158, 623.872572},
    {1600.0, 400.0, 7, 89.80, 677.225166, 793.667609, 793.578609},
    {1600.0, 500.0, 12, 83.53, 972.556896, 1062.190642, 1062.179295},
    {1800.0, 300.0, 5, 99.61, 760.938368, 911.623470, 911.387410},
    {1800.0, 400.0, 8, 88.16, 762.106365, 847.418560, 847.377538},
    {1800.0, 500.0, 15, 82.25, 1199.127594, 1266.285429, 1266.227616},
};

}  // namespace

TEST_CASE("distance interval at reference operating points") {
  for (const bounds_row& r : kBoundsRows) {
    CAPTURE(r.q_main);
    CAPTURE(r.q_ramp);
    const merge_inputs in = scenario(r.q_main, r.q_ramp);
    const double v_c = units::kmh(r.v_c_kmh);

    const d_interval mean = d_bounds(r.n, v_c, in, gap_rule::mean_arrival);
    CHECK(mean.lb == doctest::Approx(r.lb_mean).epsilon(1e-8));
    CHECK(mean.ub == doctest::Approx(r.ub).epsilon(1e-8));

    const d_interval tight = d_bounds(r.n, v_c, in, gap_rule::tight_follower);
    CHECK(tight.lb == doctest::Approx(r.lb_tight).epsilon(1e-8));
    CHECK(tight.ub == doctest::Approx(r.ub).epsilon(1e-8));

    // The worst-case rule demands more room, and at these operating points
    // it leaves only a sliver of slack below the wave-dissipation cap.
    CHECK(tight.lb > mean.lb);
    CHECK(tight.valid());
    CHECK(tight.ub - tight.lb < 0.5);
  }
}

TEST_CASE("distance interval argument checking") {
  const merge_inputs in = scenario(1600.0, 300.0);
  CHECK_THROWS_AS(d_bounds(0, units::kmh(90.0), in), model_error);
  CHECK_THROWS_AS(d_bounds(4, units::kmh(121.0), in), model_error);
  CHECK_THROWS_AS(quadratic_form(4, in.fd.v_free, in), model_error);
}

TEST_CASE("quadratic coefficients at a reference operating point") {
  const merge_inputs in = scenario(1600.0, 300.0);
  const quadratic_objective q = quadratic_form(4, units::kmh(96.67), in);
  CHECK(q.a_coef == doctest::Approx(0.0017374143210846734).epsilon(1e-12));
  CHECK(q.b_coef == doctest::Approx(4.032223774781909).epsilon(1e-12));
  CHECK(q.a_coef > 0.0);
  CHECK(-q.b_coef / (2.0 * q.a_coef) ==
        doctest::Approx(-1160.4093870552933).epsilon(1e-12));
}

TEST_CASE("quadratic matches the relaxed objective") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int tried = 0;
  for (int trial = 0; trial < 400 && tried < 80; ++trial) {
    const merge_inputs in =
        scenario(1200.0 + 800.0 * u01(rng), 100.0 + 500.0 * u01(rng));
    const double v_c = units::kmh(75.5 + 43.0 * u01(rng));
    const int n = 1 + static_cast<int>(16.0 * u01(rng));
    quadratic_objective q;
    try {
      q = quadratic_form(n, v_c, in, gap_rule::tight_follower);
    } catch (const model_error&) {
      continue;
    }
    if (!(q.d_lb <= q.d_ub)) continue;
    ++tried;
    CHECK(q.a_coef > 0.0);
    const double d = q.d_lb + (q.d_ub - q.d_lb) * u01(rng);
    CHECK(q.eval(d) ==
          doctest::Approx(total_delay_relaxed({n, v_c, d}, in)).epsilon(1e-9));
  }
  CHECK(tried >= 60);
}

TEST_CASE("optimal distance clamps the vertex into the interval") {
  // At the reference operating point the vertex is far below the interval,
  // so both rules land on their lower bound.
  const merge_inputs ref = scenario(1600.0, 300.0);
  CHECK(optimal_d(4, units::kmh(96.67), ref, gap_rule::mean_arrival) ==
        doctest::Approx(461.733819).epsilon(1e-8));
  CHECK(optimal_d(4, units::kmh(96.67), ref, gap_rule::tight_follower) ==
        doctest::Approx(623.872572).epsilon(1e-8));

  // A slow ramp (v_r = 6 m/s) makes waiting at the ramp expensive enough to
  // pull the vertex inside, and past, the interval.
  merge_inputs slow_ramp = scenario(1300.0, 150.0);
  slow_ramp.v_r = 6.0;
  const d_interval interior =
      d_bounds(2, units::kmh(84.0), slow_ramp, gap_rule::tight_follower);
  CHECK(interior.lb == doctest::Approx(251.71980).epsilon(1e-6));
  CHECK(interior.ub == doctest::Approx(465.70258).epsilon(1e-6));
  CHECK(optimal_d(2, units::kmh(84.0), slow_ramp, gap_rule::tight_follower) ==
        doctest::Approx(272.0781101614432).epsilon(1e-12));

  const d_interval above =
      d_bounds(2, units::kmh(90.0), slow_ramp, gap_rule::tight_follower);
  CHECK(optimal_d(2, units::kmh(90.0), slow_ramp, gap_rule::tight_follower) ==
        doctest::Approx(above.ub).epsilon(1e-14));
  CHECK(above.ub == doctest::Approx(565.3147078285351).epsilon(1e-12));

  // Raising the platoon size until the interval empties must throw.
  bool threw = false;
  for (int n = 1; n <= 50; ++n) {
    try {
      optimal_d(n, units::kmh(96.67), ref, gap_rule::tight_follower);
    } catch (const model_error& e) {
      CHECK(e.code() == errc::infeasible_pair);
      threw = true;
      break;
    }
  }
  CHECK(threw);
}

TEST_CASE("planner reproduces the reference plans") {
  struct row {
    double q_main, q_ramp;
    int n;
    double v_c_kmh, d, total;
    int m;
  };
  const row rows[] = {
      {1600.0, 300.0, 4, 96.674, 624.00, 10722.9, 7},
      {1600.0, 400.0, 7, 89.809, 793.89, 20706.9, 12},
      {1600.0, 500.0, 12, 83.531, 1062.23, 37101.9, 19},
      {1800.0, 300.0, 5, 99.619, 911.87, 12991.0, 10},
      {1800.0, 400.0, 8, 88.166, 847.59, 24661.3, 17},
      {1800.0, 500.0, 15, 82.258, 1266.59, 47376.6, 29},
  };
  for (const row& r : rows) {
    CAPTURE(r.q_main);
    CAPTURE(r.q_ramp);
    const solution s = solve(scenario(r.q_main, r.q_ramp));
    CHECK(s.plan.n == r.n);
    CHECK(units::to_kmh(s.plan.v_c) == doctest::Approx(r.v_c_kmh).epsilon(6e-4));
    CHECK(s.plan.d == doctest::Approx(r.d).epsilon(4e-3));
    CHECK(s.report.total == doctest::Approx(r.total).epsilon(5e-3));
    CHECK(s.report.m == r.m);

    // The plan the search returns must itself be feasible under the
    // worst-case gap rule it searched with.
    const merge_inputs in = scenario(r.q_main, r.q_ramp);
    const d_interval b = d_bounds(s.plan.n, s.plan.v_c, in, gap_rule::tight_follower);
    CHECK(s.plan.d >= b.lb - 1e-6);
    CHECK(s.plan.d <= b.ub + 1e-6);
  }
}

TEST_CASE("planner lands on a platoon-size breakpoint") {
  const solution s = solve(scenario(1600.0, 300.0));
  REQUIRE_FALSE(s.breakpoints.empty());
  for (size_t i = 1; i < s.breakpoints.size(); ++i)
    CHECK(s.breakpoints[i - 1].v_c < s.breakpoints[i].v_c);
  double nearest = 1e9;
  for (const breakpoint_info& bp : s.breakpoints)
    nearest = std::min(nearest, std::abs(bp.v_c - s.plan.v_c));
  CHECK(nearest < units::kmh(0.01));
}

TEST_CASE("planner agrees with the exhaustive reference search") {
  for (const double q_ramp : {300.0, 500.0}) {
    const merge_inputs in = scenario(1600.0, q_ramp);
    const solution fast = solve(in);
    const solution slow = brute_force_solve(in, 0.2);
    CHECK(fast.plan.n == slow.plan.n);
    CHECK(fast.report.total <=
          slow.report.total * (1.0 + 1e-3) + 1e-9);  // refinement only helps
  }
}

TEST_CASE("largest serviceable ramp demand falls with mainline demand") {
  const merge_inputs tmpl = scenario(1600.0, 300.0);
  const struct {
    double q_main;
    int q_ramp_max;
  } rows[] = {{1200.0, 804}, {1400.0, 759}, {1600.0, 707},
              {1800.0, 649}, {2000.0, 583}};
  int prev = 100000;
  for (const auto& r : rows) {
    const int got = max_ramp_flow(r.q_main, tmpl);
    CAPTURE(r.q_main);
    CHECK(std::abs(got - r.q_ramp_max) <= 2);
    CHECK(got <= prev);
    prev = got;
  }
  CHECK(max_ramp_flow(1600.0, tmpl) >= 500);
  CHECK(max_ramp_flow(1800.0, tmpl) >= 500);
}

TEST_CASE("infeasible demands raise a diagnosable error") {
  bool threw = false;
  try {
    solve(scenario(2000.0, 900.0));
  } catch (const infeasible_scenario_error& e) {
    threw = true;
    CHECK(e.code() == errc::scenario_infeasible);
    CHECK_FALSE(e.closest().feasible());
    CHECK(e.closest().min_margin() < 0.0);
  }
  CHECK(threw);
}
