#pragma once

#include <algorithm>
#include <cmath>

#include "comc/sim/vehicle.hpp"
#include "comc/traffic_flow.hpp"

namespace comc::sim {

struct cf_limits {
  double a_max = 2.75;       // comfortable acceleration bound (m/s^2)
  double b = 2.75;           // comfortable deceleration bound (m/s^2)
  double b_emergency = 6.0;  // hard deceleration floor (m/s^2)
  double dt = 0.1;           // step length (s)
  // First-order lag of human acceleration response: ordinary vehicles close
  // the last accel_relax * a_max of a speed deficit exponentially instead of
  // instantly. Braking is never lagged, and commanded (scripted) vehicles
  // track exactly, so only startup and recovery behavior is affected; it is
  // what keeps standing-queue discharge below free-flow capacity.
  double accel_relax = 1.2;  // (s)
};

// Largest speed that keeps the follower collision-free against a leader
// moving at v_leader with net gap `net_gap` (leader rear to follower front),
// assuming both can brake at rate b: solves
//   cc1 * v + v^2 / (2b) <= (net_gap - cc0) + v_leader^2 / (2b).
// Its fixed point under equal speeds is a net gap of exactly cc0 + cc1 * v,
// the equilibrium following distance.
inline double safe_speed(double net_gap, double v_leader, const fd_params& fd,
                         double b) {
  const double bt = b * fd.cc1;
  const double disc =
      bt * bt + v_leader * v_leader + 2.0 * b * (net_gap - fd.cc0);
  if (disc <= 0.0) return 0.0;
  return std::max(0.0, std::sqrt(disc) - bt);
}

struct speed_update {
  double v = 0.0;
  bool emergency = false;  // demanded deceleration exceeded the comfort bound
};

// Applies response limits to a demanded speed. Acceleration is bounded by
// a_max and, for ordinary (non-commanded) vehicles, by the first-order
// response lag. Braking beyond the comfortable rate is granted up to the
// emergency rate but reported, so runs can assert it never happens in
// nominal operation.
inline speed_update clamp_speed(double v, double want, const cf_limits& lim,
                                bool commanded = false) {
  const double lo = std::max(0.0, v - lim.b_emergency * lim.dt);
  double rise = lim.a_max;
  if (!commanded && want > v)
    rise = std::min(rise, (want - v) / lim.accel_relax);
  const double hi = v + rise * lim.dt;
  speed_update out;
  out.v = std::clamp(want, lo, hi);
  out.emergency = (v - want) > lim.b * lim.dt + 1e-9;
  return out;
}

// One step of ordinary driving: desired speed capped by car following, passed
// through the response limits; returns the realized acceleration.
inline double car_following_accel(const vehicle& follower,
                                  const vehicle* leader, double v_des,
                                  const fd_params& fd, const cf_limits& lim) {
  double want = v_des;
  if (leader)
    want = std::min(want, safe_speed(leader->pos - fd.veh_len - follower.pos,
                                     leader->speed, fd, lim.b));
  return (clamp_speed(follower.speed, want, lim).v - follower.speed) / lim.dt;
}

}  // namespace comc::sim
