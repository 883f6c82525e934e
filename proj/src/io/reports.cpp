#include "comc/io/reports.hpp"

#include <cstdio>

namespace comc::io {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string format_trajectory_csv(const sim::trajectory_log& log) {
  std::string out = "time_s,vehicle_id,origin,role,pos_m,speed_mps,accel_mps2\n";
  out.reserve(out.size() + log.rows.size() * 64);
  char buf[128];
  for (const sim::traj_row& r : log.rows) {
    const int len =
        std::snprintf(buf, sizeof buf, "%.2f,%d,%s,%s,%.2f,%.4f,%.4f\n", r.t,
                      r.id, to_string(r.origin), to_string(r.role), r.pos,
                      r.speed, r.accel);
    out.append(buf, std::size_t(len));
  }
  return out;
}

std::string format_contour_csv(const sim::speed_contour& contour) {
  std::string out = "section_m,bin_start_s,mean_speed_mps,count\n";
  out.reserve(out.size() + contour.cells.size() * 32);
  char buf[96];
  for (std::size_t s = 0; s < contour.sections.size(); ++s) {
    for (std::size_t b = 0; b < contour.bin_starts.size(); ++b) {
      const sim::contour_cell& c = contour.at(s, b);
      int len;
      if (c.count)
        len = std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.4f,%ld\n",
                            contour.sections[s], contour.bin_starts[b],
                            c.mean_speed, c.count);
      else
        len = std::snprintf(buf, sizeof buf, "%.2f,%.2f,,0\n",
                            contour.sections[s], contour.bin_starts[b]);
      out.append(buf, std::size_t(len));
    }
  }
  return out;
}

namespace {

nlohmann::ordered_json class_json(const sim::class_stats& c) {
  nlohmann::ordered_json j;
  j["count"] = c.count;
  j["mean_travel_s"] = c.mean_travel_s;
  j["mean_delay_s"] = c.mean_delay_s;
  return j;
}

}  // namespace

nlohmann::ordered_json metrics_json(const sim::sim_metrics& m) {
  nlohmann::ordered_json j;
  j["entered"] = m.entered;
  j["exited"] = m.exited;
  j["conservation_ok"] = m.conservation_ok;
  j["emergency_brake_events"] = m.emergency_brake_events;
  j["throughput_vph"] = m.throughput_vph;
  j["mainline"] = class_json(m.mainline);
  j["ramp"] = class_json(m.ramp);
  j["overall"] = class_json(m.overall);
  nlohmann::ordered_json sp;
  sp["samples"] = m.spacing.samples;
  sp["max_rel_err"] = m.spacing.max_rel_err;
  sp["worst_time_s"] = m.spacing.worst_time;
  sp["worst_vehicle_id"] = m.spacing.worst_id;
  sp["worst_speed_mps"] = m.spacing.worst_speed;
  sp["worst_net_m"] = m.spacing.worst_net;
  j["spacing"] = sp;
  if (m.cycles) {
    const sim::cycle_stats& cs = *m.cycles;
    nlohmann::ordered_json c;
    c["cycles"] = cs.cycles;
    c["complete"] = cs.complete;
    c["deferrals"] = cs.deferrals;
    c["uncongested"] = cs.uncongested;
    c["gap_within_tol"] = cs.gap_within_tol;
    c["gap_error_max_s"] = cs.gap_error_max_s;
    c["min_cycle_spacing_s"] = cs.min_cycle_spacing_s;
    c["t_sw_s"] = cs.t_sw_s;
    j["cycles"] = c;
  } else {
    j["cycles"] = nullptr;
  }
  return j;
}

nlohmann::ordered_json plan_json(const solution& sol) {
  nlohmann::ordered_json j;
  j["n"] = sol.plan.n;
  j["v_c_kmh"] = units::to_kmh(sol.plan.v_c);
  j["d_m"] = sol.plan.d;
  j["m"] = sol.report.m;
  j["t_sw_s"] = sol.report.t_sw;
  j["cycle_interval_s"] = sol.report.cycle_interval;
  j["cycles_per_h"] = sol.report.r;
  j["mainline_cycle_delay_s"] = sol.report.mainline_sum;
  j["ramp_cycle_delay_s"] = sol.report.ramp_sum;
  j["total_delay_s_per_h"] = sol.report.total;
  j["relaxed_total_s_per_h"] = sol.relaxed_total;
  return j;
}

}  // namespace comc::io
