#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "comc/traffic_flow.hpp"

using namespace comc;

namespace {
errc thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const model_error& e) {
    return e.code();
  }
  FAIL("expected model_error");
  return errc::domain;
}
}  // namespace

TEST_CASE("unit conversions round-trip") {
  CHECK(units::kmh(120.0) == doctest::Approx(33.333333333333336).epsilon(1e-14));
  CHECK(units::to_kmh(units::kmh(96.67)) == doctest::Approx(96.67).epsilon(1e-13));
  CHECK(units::vph(1800.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(units::to_vph(units::vph(437.0)) == doctest::Approx(437.0).epsilon(1e-13));
}

TEST_CASE("equilibrium headway at reference speeds") {
  const fd_params fd;
  CHECK(equilibrium_state(fd.v_free, fd).h == doctest::Approx(1.0761).epsilon(1e-10));
  CHECK(equilibrium_state(fd.v_crit, fd).h == doctest::Approx(1.18176).epsilon(1e-10));
  CHECK(equilibrium_state(units::kmh(96.67), fd).h ==
        doctest::Approx(1.1185993586428056).epsilon(1e-12));
  CHECK(equilibrium_state(units::kmh(82.25), fd).h ==
        doctest::Approx(1.1569240121580548).epsilon(1e-12));
}

TEST_CASE("equilibrium states satisfy the flow identities") {
  const fd_params fd;
  double prev_q = 0.0;
  for (double v = 1.0; v <= 40.0; v += 0.5) {
    const traffic_state s = equilibrium_state(v, fd);
    CHECK(s.q == doctest::Approx(s.k * s.v).epsilon(1e-12));
    CHECK(s.h == doctest::Approx(1.0 / s.q).epsilon(1e-12));
    CHECK(s.k * equilibrium_spacing(v, fd) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.q > prev_q);  // flow grows with speed on this curve
    prev_q = s.q;
  }
}

TEST_CASE("demand states pin flow and speed") {
  const fd_params fd;
  const traffic_state a = demand_state(units::vph(1600.0), fd.v_free);
  CHECK(a.h == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(a.k == doctest::Approx(a.q / a.v).epsilon(1e-12));
  const traffic_state b = demand_state(units::vph(1800.0), fd.v_free);
  CHECK(b.h == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.q == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(thrown_code([&] { demand_state(0.0, fd.v_free); }) == errc::domain);
  CHECK(thrown_code([&] { demand_state(units::vph(1600.0), -1.0); }) == errc::domain);
}

TEST_CASE("interface speed between demand and compact states") {
  const fd_params fd;
  const traffic_state o16 = demand_state(units::vph(1600.0), fd.v_free);
  const traffic_state o18 = demand_state(units::vph(1800.0), fd.v_free);
  CHECK(shockwave_speed(o16, equilibrium_state(units::kmh(96.67), fd)) ==
        doctest::Approx(22.52339913).epsilon(1e-8));
  CHECK(shockwave_speed(o18, equilibrium_state(units::kmh(82.25), fd)) ==
        doctest::Approx(15.95819842).epsilon(1e-8));

  for (double q = 1200.0; q <= 2000.0; q += 200.0) {
    const traffic_state o = demand_state(units::vph(q), fd.v_free);
    for (double vc = 75.0; vc < 120.0; vc += 5.0) {
      const traffic_state c = equilibrium_state(units::kmh(vc), fd);
      const double w = shockwave_speed(o, c);
      CHECK(w > 0.0);
      CHECK(w < c.v);
    }
  }
}

TEST_CASE("interface speed failure modes") {
  const fd_params fd;
  const traffic_state s = equilibrium_state(units::kmh(90.0), fd);
  CHECK(thrown_code([&] { shockwave_speed(s, s); }) == errc::degenerate_wave);

  // Demand above the compact state's flow: the slow state sheds vehicles
  // instead of collecting them.
  const traffic_state heavy = demand_state(units::vph(3200.0), fd.v_free);
  const traffic_state slow = equilibrium_state(fd.v_crit, fd);
  CHECK(thrown_code([&] { shockwave_speed(heavy, slow); }) ==
        errc::compaction_infeasible);
}

TEST_CASE("parameter validation") {
  fd_params fd;
  CHECK_NOTHROW(fd.validate());
  fd.v_crit = fd.v_free;
  CHECK(thrown_code([&] { fd.validate(); }) == errc::domain);
  fd = fd_params{};
  fd.cc1 = 0.0;
  CHECK(thrown_code([&] { fd.validate(); }) == errc::domain);
  CHECK(thrown_code([&] { equilibrium_state(0.0, fd_params{}); }) == errc::domain);
  CHECK(thrown_code([&] { equilibrium_spacing(-1.0, fd_params{}); }) == errc::domain);
}
