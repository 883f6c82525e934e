#pragma once

#include <comc/errors.hpp>

namespace comc::sim {

// Single-lane freeway with one on-ramp. Mainline positions run 0..total_len()
// with the ramp nose (merge point) at mp_pos(). Ramp positions run along their
// own path coordinate, 0 at the ramp entry; the path continues onto the
// acceleration lane when one is used. map_to_main() converts a ramp path
// coordinate to the mainline coordinate alongside it (the two are parallel
// near the nose), so trajectory plots share one axis.
struct road_geometry {
  double upstream_len = 2000.0;   // mainline entry -> merge point (m)
  double downstream_len = 500.0;  // merge point -> mainline exit (m)
  double ramp_len = 700.0;        // ramp entry -> merge point along ramp (m)
  double accel_lane_len = 240.0;  // acceleration lane past the nose (m)

  double mp_pos() const { return upstream_len; }
  double total_len() const { return upstream_len + downstream_len; }
  // Ramp path coordinate of the nose; beyond it the path is the accel lane.
  double nose_path() const { return ramp_len; }
  double accel_end_path() const { return ramp_len + accel_lane_len; }
  double map_to_main(double ramp_path) const { return ramp_path + (mp_pos() - ramp_len); }

  // em = end of the merging area, d_prime downstream of the merge point.
  double em_pos(double d_prime) const { return mp_pos() + d_prime; }
  // sc = speed-change position, d upstream of the merge point.
  double sc_pos(double d) const { return mp_pos() - d; }
  // wp = ramp waiting position, s_wp upstream of the merge point along the ramp.
  double wp_pos(double s_wp) const { return ramp_len - s_wp; }

  // Static shape checks; plan-dependent positions are validated by the run.
  void validate(double d_prime) const {
    if (!(upstream_len > 0.0) || !(downstream_len > 0.0) || !(ramp_len > 0.0) ||
        !(accel_lane_len >= 0.0))
      throw model_error(errc::domain, "road geometry lengths must be positive");
    if (!(d_prime > 0.0) || em_pos(d_prime) > total_len())
      throw model_error(errc::domain,
                        "merging-area end must lie within the downstream extent");
    if (accel_lane_len > downstream_len)
      throw model_error(errc::domain,
                        "acceleration lane must lie within the downstream extent");
  }
};

}  // namespace comc::sim
