#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace comc::sim {

enum class vehicle_origin { mainline, ramp };
enum class vehicle_role { normal, facilitating, platoon_member };

inline const char* to_string(vehicle_origin o) {
  return o == vehicle_origin::mainline ? "mainline" : "ramp";
}

inline const char* to_string(vehicle_role r) {
  switch (r) {
    case vehicle_role::facilitating: return "facilitating";
    case vehicle_role::platoon_member: return "platoon_member";
    default: return "normal";
  }
}

// Live simulation record. pos is the front-bumper coordinate in the vehicle's
// current lane: mainline x when on_main, ramp path coordinate otherwise.
struct vehicle {
  int id = 0;
  vehicle_origin origin = vehicle_origin::mainline;
  vehicle_role role = vehicle_role::normal;
  double pos = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  double entry_time = 0.0;
  std::optional<double> exit_time;

  bool on_main = false;
  // Scripted speed commands override the desired speed, never the safety cap.
  // Facilitating: cruise at fv0, comfortable deceleration from ft1 on, hold
  // the plan speed to the end of the merging area. Platoon member: at rest
  // until pt0, constant plan acceleration to the plan speed, hold likewise.
  bool scripted = false;
  double fv0 = 0.0, ft1 = 0.0, pt0 = 0.0;
  bool queued = false;    // registered stopped at the ramp waiting position
  bool released = false;  // committed to a platoon
  int last_leader = -1;   // lane leader one step ago; gates spacing samples

  double mark_in = -1.0, mark_out = -1.0;  // instrument-line crossing times
  double em_cross = -1.0;                  // merging-area-end crossing time
};

// One per-second trajectory sample. pos is always in mainline coordinates
// (ramp positions are mapped alongside) so time-space plots share one axis.
struct traj_row {
  double t = 0.0;
  int id = 0;
  vehicle_origin origin = vehicle_origin::mainline;
  vehicle_role role = vehicle_role::normal;
  double pos = 0.0, speed = 0.0, accel = 0.0;
};

struct vehicle_summary {
  int id = 0;
  vehicle_origin origin = vehicle_origin::mainline;
  double entry_time = 0.0;
  std::optional<double> exit_time;
  double mark_in = -1.0, mark_out = -1.0;
  double em_cross = -1.0;
};

// One coordination cycle. lead_in is the distance before the speed-change
// position at which the facilitating deceleration starts so that the
// merge-point arrival matches the constant-speed schedule; naive_bias is the
// early arrival a deceleration starting at the speed-change position itself
// would have caused.
struct cycle_record {
  double t_start = 0.0;     // appointment time
  double t_release = 0.0;   // platoon release = scheduled speed-change crossing
  double v0 = 0.0;          // facilitating speed at appointment (m/s)
  double lead_in = 0.0;     // (m)
  double naive_bias = 0.0;  // (s)
  int n = 0;
  int deferrals = 0;         // candidates skipped for being below the plan speed
  bool uncongested = false;  // started within 2% of the free speed
  double t_sw = 0.0;         // dissipation window enforced before the next cycle
  int facil_id = 0, leader_id = 0;
  double facil_mp = -1.0, leader_mp = -1.0;  // merge-point arrival times
  double gap_error = 0.0;                    // facil_mp - leader_mp - n*h_c (s)
  bool complete = false;
};

// Interpolated crossing of a fixed mainline section line (mainline lane only).
struct contour_event {
  double t = 0.0, speed = 0.0, x = 0.0;
};

// Steady-state following distances compared against the equilibrium spacing;
// sampled only when follower and leader speeds are settled.
struct spacing_check {
  long samples = 0;
  double max_rel_err = 0.0;
  // state of the worst sample, for diagnosing outliers
  double worst_time = -1.0;
  int worst_id = -1;
  double worst_speed = 0.0;
  double worst_net = 0.0;
};

struct trajectory_log {
  std::vector<traj_row> rows;
  std::vector<vehicle_summary> vehicles;
  std::vector<cycle_record> cycles;
  std::vector<contour_event> crossings;
  spacing_check spacing;
  long emergency_brake_events = 0;
  long entered = 0, exited = 0;
  bool conservation_ok = true;
  double v_free = 0.0, v_ramp = 0.0;  // design speeds, for ideal travel times
};

// Step-level invariant violation (vehicle overlap or a headcount mismatch).
// Carries everything logged up to the fault for a post-mortem dump.
class sim_fault : public std::runtime_error {
 public:
  sim_fault(const std::string& what, trajectory_log partial)
      : std::runtime_error(what), log(std::move(partial)) {}

  trajectory_log log;
};

}  // namespace comc::sim
