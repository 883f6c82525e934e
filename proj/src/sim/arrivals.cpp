#include "comc/sim/arrivals.hpp"

#include <string>

#include "comc/errors.hpp"

namespace comc::sim {

arrival_schedule generate_arrivals(std::uint64_t seed, double q_main,
                                   double q_ramp, double duration,
                                   const fd_params& fd) {
  if (!(q_main > 0.0) || !(q_ramp > 0.0))
    throw model_error(errc::domain, "demand flows must be positive");
  if (!(duration > 0.0))
    throw model_error(errc::domain, "duration must be positive");
  fd.validate();

  const double h_min = equilibrium_state(fd.v_free, fd).h;
  const double mean_main = 1.0 / q_main;
  if (mean_main <= h_min)
    throw model_error(errc::scenario_infeasible,
                      "mainline demand gives a mean headway of " +
                          std::to_string(mean_main) +
                          " s, at or below the minimum feasible headway of " +
                          std::to_string(h_min) + " s");

  std::mt19937_64 rng(seed);
  arrival_schedule out;
  const double spare_rate = 1.0 / (mean_main - h_min);
  for (double t = h_min + exponential_sample(rng, spare_rate); t <= duration;
       t += h_min + exponential_sample(rng, spare_rate))
    out.mainline.push_back(t);
  for (double t = exponential_sample(rng, q_ramp); t <= duration;
       t += exponential_sample(rng, q_ramp))
    out.ramp.push_back(t);
  return out;
}

}  // namespace comc::sim
