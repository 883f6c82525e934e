#pragma once

#include <optional>

#include "comc/model.hpp"
#include "comc/sim/geometry.hpp"
#include "comc/sim/metrics.hpp"
#include "comc/sim/vehicle.hpp"

namespace comc::sim {

struct run_spec {
  merge_inputs inputs;
  road_geometry geom;
  sim_config cfg;
  // Required in coordination mode; ignored otherwise.
  std::optional<control_plan> plan;

  void validate() const;
};

struct run_result {
  trajectory_log log;
  sim_metrics metrics;
};

// Deterministic single-threaded run: identical spec -> identical log bytes.
// Throws sim_fault if vehicles overlap or the headcount stops balancing.
run_result run(const run_spec& spec);

}  // namespace comc::sim
