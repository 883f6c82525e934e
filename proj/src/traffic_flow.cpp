#include "comc/traffic_flow.hpp"

#include <cmath>
#include <string>

namespace comc {

void fd_params::validate() const {
  if (!(cc0 > 0.0) || !(cc1 > 0.0) || !(veh_len > 0.0))
    throw model_error(errc::domain, "spacing parameters must be positive");
  if (!(v_crit > 0.0) || !(v_crit < v_free))
    throw model_error(errc::domain, "speed envelope requires 0 < v_crit < v_free");
}

double equilibrium_spacing(double v, const fd_params& fd) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw model_error(errc::domain, "speed must be non-negative");
  return fd.cc0 + fd.veh_len + fd.cc1 * v;
}

traffic_state equilibrium_state(double v, const fd_params& fd) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw model_error(errc::domain, "equilibrium_state requires v > 0");
  const double s = equilibrium_spacing(v, fd);
  const double h = s / v;
  const double q = 1.0 / h;
  return traffic_state{v, q, q / v, h};
}

traffic_state demand_state(double q, double v) {
  if (!(q > 0.0) || !std::isfinite(q))
    throw model_error(errc::domain, "demand_state requires q > 0");
  if (!(v > 0.0) || !std::isfinite(v))
    throw model_error(errc::domain, "demand_state requires v > 0");
  return traffic_state{v, q, q / v, 1.0 / q};
}

double shockwave_speed(const traffic_state& state_o, const traffic_state& state_c) {
  const double dk = state_c.k - state_o.k;
  if (dk == 0.0)
    throw model_error(errc::degenerate_wave,
                      "equal densities: no interface between the states");
  const double w = (state_c.q - state_o.q) / dk;
  if (!(w > 0.0))
    throw model_error(errc::compaction_infeasible,
                      "compact state does not absorb vehicles from the demand state "
                      "(interface speed " + std::to_string(w) + " m/s)");
  return w;
}

}  // namespace comc
