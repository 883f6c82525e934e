#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "comc/optimizer.hpp"
#include "comc/sim/metrics.hpp"
#include "comc/sim/vehicle.hpp"

namespace comc::io {

// 64-bit FNV-1a over raw bytes; used to fingerprint report files so
// deterministic reruns can be checked byte-for-byte without keeping both.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Per-second vehicle samples. Positions are mainline-mapped for every
// vehicle, ramp included, so one time-space plot covers both streams.
// Columns: time_s,vehicle_id,origin,role,pos_m,speed_mps,accel_mps2
std::string format_trajectory_csv(const sim::trajectory_log& log);

// Section-by-time mean-speed grid, section-major. The speed cell is empty
// when no vehicle crossed the section in the bin.
// Columns: section_m,bin_start_s,mean_speed_mps,count
std::string format_contour_csv(const sim::speed_contour& contour);

nlohmann::ordered_json metrics_json(const sim::sim_metrics& m);
nlohmann::ordered_json plan_json(const solution& sol);

}  // namespace comc::io
