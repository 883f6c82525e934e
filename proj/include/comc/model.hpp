#pragma once

#include <array>
#include <string>
#include <vector>

#include "comc/traffic_flow.hpp"

namespace comc {

// Everything a single merge-coordination problem needs besides the decision
// variables. state_o must travel at fd.v_free.
struct merge_inputs {
  traffic_state state_o;              // mainline demand state at design speed
  fd_params fd;
  double d_prime = 457.2;             // merge point -> end of merge area (m)
  double lambda = units::vph(300.0);  // ramp arrival rate (veh/s)
  double v_r = units::kmh(60.0);      // ramp design speed (m/s)
  double b = 2.75;                    // comfortable braking rate (m/s^2)
  double a_max = 2.75;                // maximum ramp acceleration (m/s^2)
  double w_m = 1.0;                   // mainline delay weight
  double w_r = 1.0;                   // ramp delay weight

  void validate() const;  // throws model_error(errc::domain)
};

// The decision triple: platoon size, cooperative speed, and the distance from
// the speed-change position to the merge point.
struct control_plan {
  int n;
  double v_c;  // m/s
  double d;    // m
};

struct platoon_kinematics_info {
  double t_br;   // braking time to stop at the waiting position (s)
  double s_br;   // braking distance (m)
  double t_acc;  // leader acceleration time, waiting position -> merge point (s)
  double a;      // constant release acceleration (m/s^2)
  double s_wp;   // waiting position -> merge point distance (m)
  double t_cr;   // cruise time, merge point -> end of merge area, at v_c (s)
  std::vector<double> t_wt;  // expected wait per queue position, j = 1..n (s)
};

struct delay_report {
  int m;                  // mainline vehicles caught by the slowdown wave
  double t_sw;            // wave dissipation time (s)
  double mainline_sum;    // per-cycle mainline delay (s)
  double ramp_sum;        // per-cycle ramp delay (s)
  double cycle_interval;  // expected time to queue n ramp arrivals (s)
  double r;               // cycles per hour
  double total;           // weighted delay-seconds per hour
};

// Time for the slowdown wave to cross the whole coordination stretch.
double shockwave_duration(const control_plan& plan, const merge_inputs& in);

// Number of mainline vehicles the wave reaches before dissipating (>= 1 for
// any cooperative speed below the design speed).
int cooperative_count(const control_plan& plan, const merge_inputs& in);

// Per-cycle mainline delay, closed form over the exact integer vehicle count.
double mainline_delay_sum(const control_plan& plan, const merge_inputs& in);

platoon_kinematics_info platoon_kinematics(const control_plan& plan,
                                           const merge_inputs& in);

// Per-cycle ramp delay, closed form (expected waiting, braking, acceleration
// and reduced-speed cruising versus an unimpeded ramp vehicle).
double ramp_delay_sum(const control_plan& plan, const merge_inputs& in);

delay_report total_delay(const control_plan& plan, const merge_inputs& in);

// Same objective with the wave vehicle count left continuous. This is the
// solver's smooth view of the objective; reported values use the integer
// count.
double total_delay_relaxed(const control_plan& plan, const merge_inputs& in);

struct constraint_margin {
  char id;           // 'a'..'e'
  std::string what;  // human-readable description of the constraint
  bool satisfied;
  double margin;     // signed distance to the boundary; >= 0 iff satisfied
};

struct feasibility_report {
  std::array<constraint_margin, 5> items;

  bool feasible() const;
  double min_margin() const;
  const constraint_margin& tightest() const;
};

// Signed margins, one per constraint:
//   a: created gap minus the gap the platoon needs (s)
//   b: cycle interval minus wave dissipation time (s)
//   c: cooperative speed minus the critical speed (m/s)
//   d: acceleration limit minus the required release acceleration (m/s^2)
//   e: structural validity of the decision triple
// Infeasibility is reported, never thrown.
feasibility_report check_constraints(const control_plan& plan, const merge_inputs& in);

}  // namespace comc
