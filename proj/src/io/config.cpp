#include "comc/io/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <utility>

#include <json.hpp>

namespace comc::io {

namespace {

using nlohmann::json;

// Flat view of every configurable field, seeded from the default-constructed
// structs so built-in defaults live in exactly one place.
struct settings {
  std::string name;
  double q_main_vph = std::numeric_limits<double>::quiet_NaN();
  double q_ramp_vph = std::numeric_limits<double>::quiet_NaN();
  double v_free_kmh, v_crit_kmh, v_ramp_kmh;
  double cc0_m, cc1_s, veh_len_m, d_prime_m;
  double b_mps2, a_max_mps2, w_main, w_ramp;
  double dt_s, duration_s, warmup_s;
  double upstream_len_m, downstream_len_m, ramp_len_m, accel_lane_len_m;
  std::vector<std::uint64_t> seeds;
  std::vector<sim::sim_mode> modes;

  settings() {
    const merge_inputs in{};
    const sim::road_geometry g;
    const sim::sim_config c;
    v_free_kmh = units::to_kmh(in.fd.v_free);
    v_crit_kmh = units::to_kmh(in.fd.v_crit);
    v_ramp_kmh = units::to_kmh(in.v_r);
    cc0_m = in.fd.cc0;
    cc1_s = in.fd.cc1;
    veh_len_m = in.fd.veh_len;
    d_prime_m = in.d_prime;
    b_mps2 = in.b;
    a_max_mps2 = in.a_max;
    w_main = in.w_m;
    w_ramp = in.w_r;
    dt_s = c.dt;
    duration_s = c.duration;
    warmup_s = c.warmup;
    upstream_len_m = g.upstream_len;
    downstream_len_m = g.downstream_len;
    ramp_len_m = g.ramp_len;
    accel_lane_len_m = g.accel_lane_len;
    for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
    modes = {sim::sim_mode::base, sim::sim_mode::comc};
  }
};

double number_at(const json& v, const std::string& path) {
  if (!v.is_number())
    throw config_error(path + ": expected a number");
  return v.get<double>();
}

std::vector<std::uint64_t> seeds_at(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw config_error(path + ": expected a non-empty array of seeds");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& e = v[i];
    if (!e.is_number_integer() || e.get<std::int64_t>() < 0)
      throw config_error(path + "[" + std::to_string(i) +
                         "]: expected a non-negative integer");
    out.push_back(e.get<std::uint64_t>());
  }
  return out;
}

std::vector<sim::sim_mode> modes_at(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw config_error(path + ": expected a non-empty array of modes");
  std::vector<sim::sim_mode> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& e = v[i];
    const std::string where = path + "[" + std::to_string(i) + "]";
    if (!e.is_string()) throw config_error(where + ": expected a string");
    const std::string s = e.get<std::string>();
    if (s == "base")
      out.push_back(sim::sim_mode::base);
    else if (s == "comc")
      out.push_back(sim::sim_mode::comc);
    else
      throw config_error(where + ": unknown mode '" + s +
                         "' (expected \"base\" or \"comc\")");
  }
  return out;
}

void apply(const json& obj, settings& s, const std::string& path,
           bool allow_name) {
  for (const auto& [key, val] : obj.items()) {
    const std::string p = path + "." + key;
    if (key == "name" && allow_name) {
      if (!val.is_string() || val.get<std::string>().empty())
        throw config_error(p + ": expected a non-empty string");
      s.name = val.get<std::string>();
    } else if (key == "q_main_vph")
      s.q_main_vph = number_at(val, p);
    else if (key == "q_ramp_vph")
      s.q_ramp_vph = number_at(val, p);
    else if (key == "v_free_kmh")
      s.v_free_kmh = number_at(val, p);
    else if (key == "v_crit_kmh")
      s.v_crit_kmh = number_at(val, p);
    else if (key == "v_ramp_kmh")
      s.v_ramp_kmh = number_at(val, p);
    else if (key == "cc0_m")
      s.cc0_m = number_at(val, p);
    else if (key == "cc1_s")
      s.cc1_s = number_at(val, p);
    else if (key == "veh_len_m")
      s.veh_len_m = number_at(val, p);
    else if (key == "d_prime_m")
      s.d_prime_m = number_at(val, p);
    else if (key == "b_mps2")
      s.b_mps2 = number_at(val, p);
    else if (key == "a_max_mps2")
      s.a_max_mps2 = number_at(val, p);
    else if (key == "w_main")
      s.w_main = number_at(val, p);
    else if (key == "w_ramp")
      s.w_ramp = number_at(val, p);
    else if (key == "dt_s")
      s.dt_s = number_at(val, p);
    else if (key == "duration_s")
      s.duration_s = number_at(val, p);
    else if (key == "warmup_s")
      s.warmup_s = number_at(val, p);
    else if (key == "upstream_len_m")
      s.upstream_len_m = number_at(val, p);
    else if (key == "downstream_len_m")
      s.downstream_len_m = number_at(val, p);
    else if (key == "ramp_len_m")
      s.ramp_len_m = number_at(val, p);
    else if (key == "accel_lane_len_m")
      s.accel_lane_len_m = number_at(val, p);
    else if (key == "seeds")
      s.seeds = seeds_at(val, p);
    else if (key == "modes")
      s.modes = modes_at(val, p);
    else
      throw config_error(p + ": unknown key");
  }
}

void require_positive(double v, const std::string& path,
                      const std::string& key) {
  if (std::isnan(v)) throw config_error(path + "." + key + ": required");
  if (!(v > 0.0)) throw config_error(path + "." + key + ": must be positive");
}

scenario_config build(const settings& s, const std::string& path) {
  if (s.name.empty()) throw config_error(path + ".name: required");
  require_positive(s.q_main_vph, path, "q_main_vph");
  require_positive(s.q_ramp_vph, path, "q_ramp_vph");
  require_positive(s.v_free_kmh, path, "v_free_kmh");
  require_positive(s.v_crit_kmh, path, "v_crit_kmh");
  require_positive(s.v_ramp_kmh, path, "v_ramp_kmh");
  require_positive(s.cc0_m, path, "cc0_m");
  require_positive(s.cc1_s, path, "cc1_s");
  require_positive(s.veh_len_m, path, "veh_len_m");
  require_positive(s.d_prime_m, path, "d_prime_m");
  require_positive(s.b_mps2, path, "b_mps2");
  require_positive(s.a_max_mps2, path, "a_max_mps2");
  if (s.w_main < 0.0 || s.w_ramp < 0.0)
    throw config_error(path + ": delay weights must be non-negative");
  require_positive(s.dt_s, path, "dt_s");
  require_positive(s.duration_s, path, "duration_s");
  if (s.warmup_s < 0.0 || s.warmup_s >= s.duration_s)
    throw config_error(path + ".warmup_s: must lie inside the duration");
  require_positive(s.upstream_len_m, path, "upstream_len_m");
  require_positive(s.downstream_len_m, path, "downstream_len_m");
  require_positive(s.ramp_len_m, path, "ramp_len_m");
  if (s.accel_lane_len_m < 0.0)
    throw config_error(path + ".accel_lane_len_m: must be non-negative");

  scenario_config sc;
  sc.name = s.name;
  sc.q_main_vph = s.q_main_vph;
  sc.q_ramp_vph = s.q_ramp_vph;
  sc.inputs.fd.cc0 = s.cc0_m;
  sc.inputs.fd.cc1 = s.cc1_s;
  sc.inputs.fd.veh_len = s.veh_len_m;
  sc.inputs.fd.v_free = units::kmh(s.v_free_kmh);
  sc.inputs.fd.v_crit = units::kmh(s.v_crit_kmh);
  sc.inputs.state_o =
      demand_state(units::vph(s.q_main_vph), units::kmh(s.v_free_kmh));
  sc.inputs.d_prime = s.d_prime_m;
  sc.inputs.lambda = units::vph(s.q_ramp_vph);
  sc.inputs.v_r = units::kmh(s.v_ramp_kmh);
  sc.inputs.b = s.b_mps2;
  sc.inputs.a_max = s.a_max_mps2;
  sc.inputs.w_m = s.w_main;
  sc.inputs.w_r = s.w_ramp;
  sc.geom.upstream_len = s.upstream_len_m;
  sc.geom.downstream_len = s.downstream_len_m;
  sc.geom.ramp_len = s.ramp_len_m;
  sc.geom.accel_lane_len = s.accel_lane_len_m;
  sc.cfg.dt = s.dt_s;
  sc.cfg.duration = s.duration_s;
  sc.cfg.warmup = s.warmup_s;
  sc.seeds = s.seeds;
  sc.modes = s.modes;
  try {
    sc.inputs.validate();
    sc.geom.validate(sc.inputs.d_prime);
    sc.cfg.validate();
  } catch (const model_error& e) {
    throw config_error(path + ": " + e.what());
  }
  return sc;
}

}  // namespace

std::vector<scenario_config> load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error(path + ": cannot open");
  json root;
  try {
    root = json::parse(f);
  } catch (const json::parse_error& e) {
    throw config_error(path + ": " + e.what());
  }
  if (!root.is_object())
    throw config_error("top level: expected an object");
  settings base;
  const json* scenarios = nullptr;
  for (const auto& [key, val] : root.items()) {
    if (key == "defaults") {
      if (!val.is_object())
        throw config_error("defaults: expected an object");
      apply(val, base, "defaults", false);
    } else if (key == "scenarios") {
      if (!val.is_array())
        throw config_error("scenarios: expected an array");
      scenarios = &val;
    } else {
      throw config_error(key + ": unknown key");
    }
  }
  if (!scenarios || scenarios->empty())
    throw config_error("scenarios: required and must not be empty");

  std::vector<scenario_config> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < scenarios->size(); ++i) {
    const std::string p = "scenarios[" + std::to_string(i) + "]";
    const json& item = (*scenarios)[i];
    if (!item.is_object()) throw config_error(p + ": expected an object");
    settings s = base;
    apply(item, s, p, true);
    scenario_config sc = build(s, p);
    if (!names.insert(sc.name).second)
      throw config_error(p + ".name: duplicate scenario name '" + sc.name +
                         "'");
    out.push_back(std::move(sc));
  }
  return out;
}

scenario_config default_scenario(const std::string& name, double q_main_vph,
                                 double q_ramp_vph) {
  settings s;
  s.name = name;
  s.q_main_vph = q_main_vph;
  s.q_ramp_vph = q_ramp_vph;
  return build(s, name);
}

}  // namespace comc::io
