#pragma once

#include "comc/errors.hpp"

namespace comc {

namespace units {
constexpr double kmh(double v) { return v / 3.6; }        // km/h -> m/s
constexpr double to_kmh(double v) { return v * 3.6; }     // m/s  -> km/h
constexpr double vph(double q) { return q / 3600.0; }     // veh/h -> veh/s
constexpr double to_vph(double q) { return q * 3600.0; }  // veh/s -> veh/h
}  // namespace units

// Equilibrium-spacing parameters (spacing grows linearly with speed) plus the
// mainline speed envelope.
struct fd_params {
  double cc0 = 1.5;      // standstill front-to-rear distance (m)
  double cc1 = 0.9;      // speed-dependent headway coefficient (s)
  double veh_len = 4.37; // vehicle length (m)
  double v_free = units::kmh(120.0);  // mainline design speed (m/s)
  double v_crit = units::kmh(75.0);   // lowest admissible cooperative speed (m/s)

  void validate() const;  // throws model_error(errc::domain)
};

// A point in the speed-flow-density plane. q = k*v and h = 1/q by
// construction of both factory functions below.
struct traffic_state {
  double v;  // m/s
  double q;  // veh/s
  double k;  // veh/m
  double h;  // mean time headway (s)
};

// Front-to-front equilibrium spacing at speed v.
double equilibrium_spacing(double v, const fd_params& fd);

// State on the equilibrium curve at speed v: what car-following compaction
// produces when a stream travels steadily at v.
traffic_state equilibrium_state(double v, const fd_params& fd);

// State pinned by a demand flow travelling at speed v; generally off the
// equilibrium curve (headway set by demand, not by car following).
traffic_state demand_state(double q, double v);

// Speed of the interface between two states. Positive values mean the
// interface recedes slower than the vehicles, so the denser state collects
// them; for a valid cooperative plan the result lies in (0, state_c.v).
double shockwave_speed(const traffic_state& state_o, const traffic_state& state_c);

}  // namespace comc
