#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "comc/traffic_flow.hpp"

namespace comc::sim {

// Uniform double in [0, 1) built from the top 53 bits of one engine draw, so
// the stream is reproducible independent of library distribution internals.
inline double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

inline double exponential_sample(std::mt19937_64& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

struct arrival_schedule {
  std::vector<double> mainline;  // entry times (s), strictly increasing
  std::vector<double> ramp;
};

// Draws the full mainline schedule first, then the ramp schedule, from one
// seeded engine. Mainline headways are shifted-exponential with the
// equilibrium headway at the free speed as a hard minimum, so the demanded
// flow is reproduced without injecting vehicles closer than they could
// physically follow; a mean headway at or below that minimum is rejected as
// an infeasible demand. Ramp headways are plain exponential.
arrival_schedule generate_arrivals(std::uint64_t seed, double q_main,
                                   double q_ramp, double duration,
                                   const fd_params& fd);

}  // namespace comc::sim
