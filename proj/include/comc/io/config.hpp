#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "comc/model.hpp"
#include "comc/sim/geometry.hpp"
#include "comc/sim/metrics.hpp"

namespace comc::io {

// Raised for malformed scenario files; messages carry the offending field
// path (e.g. "scenarios[2].q_ramp_vph: must be positive").
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One fully resolved scenario: file-level defaults overlaid with the
// scenario's own values, converted to SI units.
struct scenario_config {
  std::string name;
  double q_main_vph = 0.0;
  double q_ramp_vph = 0.0;
  merge_inputs inputs;
  sim::road_geometry geom;
  sim::sim_config cfg;  // seed and mode are filled in per run
  std::vector<std::uint64_t> seeds;
  std::vector<sim::sim_mode> modes;
};

// Parses {"defaults": {...}, "scenarios": [{...}, ...]}. Every field not
// given falls back to the built-in defaults; unknown keys are rejected.
std::vector<scenario_config> load_config(const std::string& path);

// A scenario on the built-in defaults with just the two demands set.
scenario_config default_scenario(const std::string& name, double q_main_vph,
                                 double q_ramp_vph);

}  // namespace comc::io
