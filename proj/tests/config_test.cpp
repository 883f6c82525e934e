#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "comc/io/config.hpp"

using namespace comc;
using comc::io::config_error;
using comc::io::load_config;
using comc::io::scenario_config;

namespace {

// Writes the given JSON text under a unique name and returns its path.
std::string stage(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("comc_config_test_" + name + ".json");
  std::ofstream out(path);
  out << text;
  out.close();
  return path.string();
}

// The parser's full message, for asserting on field paths.
std::string error_text(const std::string& path) {
  try {
    (void)load_config(path);
  } catch (const config_error& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::string& msg, const std::string& needle) {
  return msg.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("a minimal scenario resolves onto the built-in defaults") {
  const auto path = stage(
      "minimal",
      R"({"scenarios":[{"name":"1a","q_main_vph":1600,"q_ramp_vph":300}]})");
  const auto scs = load_config(path);
  REQUIRE(scs.size() == 1);
  const scenario_config& sc = scs[0];
  CHECK(sc.name == "1a");
  CHECK(sc.q_main_vph == 1600.0);
  CHECK(sc.q_ramp_vph == 300.0);
  CHECK(sc.cfg.duration == 7200.0);
  CHECK(sc.cfg.warmup == 600.0);
  CHECK(sc.cfg.dt == doctest::Approx(0.1));
  REQUIRE(sc.seeds.size() == 10);
  CHECK(sc.seeds.front() == 1);
  CHECK(sc.seeds.back() == 10);
  REQUIRE(sc.modes.size() == 2);
  CHECK(sc.modes[0] == sim::sim_mode::base);
  CHECK(sc.modes[1] == sim::sim_mode::comc);
  // Fundamental-diagram and corridor defaults, in SI units.
  CHECK(sc.inputs.fd.cc0 == doctest::Approx(1.5));
  CHECK(sc.inputs.fd.cc1 == doctest::Approx(0.9));
  CHECK(sc.inputs.fd.veh_len == doctest::Approx(4.37));
  CHECK(sc.inputs.fd.v_free == doctest::Approx(120.0 / 3.6));
  CHECK(sc.inputs.v_r == doctest::Approx(60.0 / 3.6));
  CHECK(sc.inputs.d_prime == doctest::Approx(457.2));
  CHECK(sc.inputs.b == doctest::Approx(2.75));
  CHECK(sc.inputs.a_max == doctest::Approx(2.75));
  CHECK(sc.inputs.state_o.q == doctest::Approx(1600.0 / 3600.0));
  CHECK(sc.inputs.lambda == doctest::Approx(300.0 / 3600.0));
  CHECK(sc.geom.upstream_len == doctest::Approx(2000.0));
  CHECK(sc.geom.downstream_len == doctest::Approx(500.0));
  CHECK(sc.geom.ramp_len == doctest::Approx(700.0));
  CHECK(sc.geom.accel_lane_len == doctest::Approx(240.0));
}

TEST_CASE("file defaults apply and scenario values override them") {
  const auto path = stage("overlay", R"({
    "defaults": {"duration_s": 1000, "v_free_kmh": 100, "seeds": [4, 5]},
    "scenarios": [
      {"name": "a", "q_main_vph": 1500, "q_ramp_vph": 350},
      {"name": "b", "q_main_vph": 1500, "q_ramp_vph": 350,
       "duration_s": 500, "warmup_s": 100, "modes": ["base"]}
    ]})");
  const auto scs = load_config(path);
  REQUIRE(scs.size() == 2);
  CHECK(scs[0].cfg.duration == 1000.0);
  CHECK(scs[0].inputs.fd.v_free == doctest::Approx(100.0 / 3.6));
  REQUIRE(scs[0].seeds.size() == 2);
  CHECK(scs[0].seeds[0] == 4);
  CHECK(scs[1].cfg.duration == 500.0);  // scenario wins over defaults
  REQUIRE(scs[1].modes.size() == 1);
  CHECK(scs[1].modes[0] == sim::sim_mode::base);
  CHECK(scs[1].inputs.fd.v_free == doctest::Approx(100.0 / 3.6));
}

TEST_CASE("unknown keys are rejected with their path") {
  const auto top = stage(
      "unknown_top",
      R"({"bogus":1,"scenarios":[{"name":"a","q_main_vph":1,"q_ramp_vph":1}]})");
  CHECK(mentions(error_text(top), "bogus"));
  const auto in_defaults = stage(
      "unknown_defaults",
      R"({"defaults":{"bogus":1},
          "scenarios":[{"name":"a","q_main_vph":1,"q_ramp_vph":1}]})");
  CHECK(mentions(error_text(in_defaults), "defaults.bogus"));
  const auto in_scenario = stage(
      "unknown_scenario",
      R"({"scenarios":[{"name":"a","q_main_vph":1,"q_ramp_vph":1,"x":2}]})");
  CHECK(mentions(error_text(in_scenario), "scenarios[0].x"));
}

TEST_CASE("demands must be present and positive") {
  const auto missing = stage("missing_q", R"({"scenarios":[{"name":"a","q_ramp_vph":300}]})");
  auto msg = error_text(missing);
  CHECK(mentions(msg, "q_main_vph"));
  CHECK(mentions(msg, "required"));
  const auto zero = stage(
      "zero_ramp",
      R"({"scenarios":[{"name":"a","q_main_vph":1600,"q_ramp_vph":0}]})");
  msg = error_text(zero);
  CHECK(mentions(msg, "q_ramp_vph"));
  CHECK(mentions(msg, "must be positive"));
}

TEST_CASE("physical fields reject out-of-range values with their path") {
  const auto bad_len = stage("bad_dprime", R"({
    "scenarios":[{"name":"a","q_main_vph":1600,"q_ramp_vph":300,
                  "d_prime_m":-457.2}]})");
  CHECK(mentions(error_text(bad_len), "d_prime_m"));
  const auto bad_warm = stage("bad_warmup", R"({
    "scenarios":[{"name":"a","q_main_vph":1600,"q_ramp_vph":300,
                  "duration_s":600,"warmup_s":600}]})");
  CHECK(mentions(error_text(bad_warm), "warmup_s"));
}

TEST_CASE("scenario naming is mandatory and unique") {
  const auto unnamed =
      stage("unnamed", R"({"scenarios":[{"q_main_vph":1600,"q_ramp_vph":300}]})");
  CHECK(mentions(error_text(unnamed), "name"));
  const auto dup = stage("dup", R"({"scenarios":[
    {"name":"a","q_main_vph":1600,"q_ramp_vph":300},
    {"name":"a","q_main_vph":1800,"q_ramp_vph":300}]})");
  CHECK(mentions(error_text(dup), "duplicate"));
}

TEST_CASE("the scenario list must be non-empty and well-formed") {
  CHECK(mentions(error_text(stage("empty", R"({"scenarios":[]})")), "scenarios"));
  CHECK(mentions(error_text(stage("no_list", R"({})")), "scenarios"));
  CHECK_THROWS_AS((void)load_config(stage("bad_syntax", "{]")), config_error);
  CHECK_THROWS_AS((void)load_config("/nonexistent/comc.json"), config_error);
}

TEST_CASE("modes and seeds are validated element-wise") {
  const auto bad_mode = stage("bad_mode", R"({
    "scenarios":[{"name":"a","q_main_vph":1600,"q_ramp_vph":300,
                  "modes":["fast"]}]})");
  CHECK(mentions(error_text(bad_mode), "fast"));
  const auto empty_modes = stage("empty_modes", R"({
    "scenarios":[{"name":"a","q_main_vph":1600,"q_ramp_vph":300,"modes":[]}]})");
  CHECK(mentions(error_text(empty_modes), "modes"));
  const auto bad_seed = stage("bad_seed", R"({
    "scenarios":[{"name":"a","q_main_vph":1600,"q_ramp_vph":300,
                  "seeds":["one"]}]})");
  CHECK(mentions(error_text(bad_seed), "seeds"));
  const auto empty_seeds = stage("empty_seeds", R"({
    "scenarios":[{"name":"a","q_main_vph":1600,"q_ramp_vph":300,"seeds":[]}]})");
  CHECK(mentions(error_text(empty_seeds), "seeds"));
}

TEST_CASE("the shipped scenario file loads the six operating points") {
  const auto scs =
      load_config(std::string(COMC_SOURCE_DIR) + "/configs/scenarios.json");
  REQUIRE(scs.size() == 6);
  CHECK(scs[0].name == "1A");
  CHECK(scs[5].name == "2C");
  for (const auto& sc : scs) {
    CHECK((sc.q_main_vph == 1600.0 || sc.q_main_vph == 1800.0));
    CHECK(sc.q_ramp_vph >= 300.0);
    CHECK(sc.q_ramp_vph <= 500.0);
  }
}
