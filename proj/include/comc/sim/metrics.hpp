#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "comc/errors.hpp"
#include "comc/sim/geometry.hpp"
#include "comc/sim/vehicle.hpp"

namespace comc::sim {

enum class sim_mode { base, comc };

inline const char* to_string(sim_mode m) {
  return m == sim_mode::base ? "base" : "comc";
}

struct sim_config {
  double dt = 0.1;          // step length (s)
  double duration = 7200.0; // simulated horizon (s)
  double warmup = 600.0;    // excluded from all statistics (s)
  std::uint64_t seed = 1;
  sim_mode mode = sim_mode::base;

  void validate() const {
    if (!(dt > 0.0)) throw model_error(errc::domain, "dt must be positive");
    if (!(duration > 0.0))
      throw model_error(errc::domain, "duration must be positive");
    if (warmup < 0.0 || warmup >= duration)
      throw model_error(errc::domain, "warmup must lie inside the duration");
  }
};

struct class_stats {
  long count = 0;
  double mean_travel_s = 0.0;
  double mean_delay_s = 0.0;
};

struct contour_cell {
  long count = 0;
  double mean_speed = 0.0;  // arithmetic mean crossing speed (m/s)
};

// Section-by-time grid of mean mainline speeds. Cells are stored
// section-major: cell (s, b) sits at index s * bin_starts.size() + b.
struct speed_contour {
  std::vector<double> sections;    // mainline x of each section line (m)
  std::vector<double> bin_starts;  // left edge of each time bin (s)
  std::vector<contour_cell> cells;

  const contour_cell& at(std::size_t s, std::size_t b) const {
    return cells[s * bin_starts.size() + b];
  }
};

struct cycle_stats {
  long cycles = 0;            // appointments after warmup
  long complete = 0;          // both merge-point arrivals observed
  long deferrals = 0;         // below-plan-speed candidates skipped
  long uncongested = 0;       // complete cycles that began near free flow
  long gap_within_tol = 0;    // uncongested cycles with |gap error| <= 0.5 s
  double gap_error_max_s = 0.0;
  double min_cycle_spacing_s = 0.0;  // smallest appointment interval
  double t_sw_s = 0.0;               // enforced dissipation window
};

struct sim_metrics {
  class_stats mainline, ramp, overall;
  double throughput_vph = 0.0;
  long emergency_brake_events = 0;
  long entered = 0, exited = 0;
  bool conservation_ok = true;
  spacing_check spacing;
  speed_contour contour;
  std::optional<cycle_stats> cycles;  // coordination runs only
};

sim_metrics compute_metrics(const trajectory_log& log,
                            const road_geometry& geom, const sim_config& cfg);

}  // namespace comc::sim
