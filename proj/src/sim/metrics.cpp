#include "comc/sim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace comc::sim {

namespace {
constexpr double kBin = 300.0;   // contour time-bin width (s)
constexpr double kGapTol = 0.5;  // created-gap error budget (s)
}  // namespace

sim_metrics compute_metrics(const trajectory_log& log,
                            const road_geometry& geom, const sim_config& cfg) {
  sim_metrics m;
  m.emergency_brake_events = log.emergency_brake_events;
  m.entered = log.entered;
  m.exited = log.exited;
  m.conservation_ok = log.conservation_ok;
  m.spacing = log.spacing;

  // Travel times are measured between fixed instrument lines 100 m inside
  // each boundary; the ideal times assume undisturbed design speeds.
  const double out_x = geom.total_len() - 100.0;
  const double ideal_main = (out_x - 100.0) / log.v_free;
  const double ideal_ramp = (geom.ramp_len - 100.0) / log.v_ramp +
                            (out_x - geom.mp_pos()) / log.v_free;

  double sum_t[2] = {0.0, 0.0}, sum_d[2] = {0.0, 0.0};
  long thr = 0;
  for (const vehicle_summary& v : log.vehicles) {
    if (v.em_cross >= cfg.warmup) ++thr;
    if (v.mark_in < cfg.warmup || v.mark_out < 0) continue;
    const bool main = v.origin == vehicle_origin::mainline;
    const double travel = v.mark_out - v.mark_in;
    class_stats& cls = main ? m.mainline : m.ramp;
    ++cls.count;
    sum_t[main ? 0 : 1] += travel;
    sum_d[main ? 0 : 1] += travel - (main ? ideal_main : ideal_ramp);
  }
  if (m.mainline.count) {
    m.mainline.mean_travel_s = sum_t[0] / double(m.mainline.count);
    m.mainline.mean_delay_s = sum_d[0] / double(m.mainline.count);
  }
  if (m.ramp.count) {
    m.ramp.mean_travel_s = sum_t[1] / double(m.ramp.count);
    m.ramp.mean_delay_s = sum_d[1] / double(m.ramp.count);
  }
  m.overall.count = m.mainline.count + m.ramp.count;
  if (m.overall.count) {
    m.overall.mean_travel_s = (sum_t[0] + sum_t[1]) / double(m.overall.count);
    m.overall.mean_delay_s = (sum_d[0] + sum_d[1]) / double(m.overall.count);
  }
  if (cfg.duration > cfg.warmup)
    m.throughput_vph = double(thr) * 3600.0 / (cfg.duration - cfg.warmup);

  const std::size_t nsec =
      std::size_t(std::lround((geom.total_len() - 200.0) / 100.0)) + 1;
  const std::size_t nbin =
      std::size_t(std::ceil((cfg.duration - cfg.warmup) / kBin));
  m.contour.sections.reserve(nsec);
  for (std::size_t i = 0; i < nsec; ++i)
    m.contour.sections.push_back(100.0 + 100.0 * double(i));
  m.contour.bin_starts.reserve(nbin);
  for (std::size_t b = 0; b < nbin; ++b)
    m.contour.bin_starts.push_back(cfg.warmup + kBin * double(b));
  m.contour.cells.assign(nsec * nbin, {});
  std::vector<double> sums(nsec * nbin, 0.0);
  for (const contour_event& e : log.crossings) {
    if (e.t < cfg.warmup) continue;
    std::size_t b = std::size_t((e.t - cfg.warmup) / kBin);
    if (b >= nbin) b = nbin - 1;
    const long si = std::lround(e.x / 100.0) - 1;
    if (si < 0 || std::size_t(si) >= nsec) continue;
    const std::size_t cell = std::size_t(si) * nbin + b;
    ++m.contour.cells[cell].count;
    sums[cell] += e.speed;
  }
  for (std::size_t i = 0; i < m.contour.cells.size(); ++i)
    if (m.contour.cells[i].count)
      m.contour.cells[i].mean_speed = sums[i] / double(m.contour.cells[i].count);

  if (cfg.mode == sim_mode::comc) {
    cycle_stats cs;
    if (!log.cycles.empty()) cs.t_sw_s = log.cycles.front().t_sw;
    cs.min_cycle_spacing_s = -1.0;  // n/a until two appointments exist
    for (std::size_t i = 0; i + 1 < log.cycles.size(); ++i) {
      const double gap = log.cycles[i + 1].t_start - log.cycles[i].t_start;
      if (cs.min_cycle_spacing_s < 0.0 || gap < cs.min_cycle_spacing_s)
        cs.min_cycle_spacing_s = gap;
    }
    for (const cycle_record& c : log.cycles) {
      if (c.t_start < cfg.warmup) continue;
      ++cs.cycles;
      cs.deferrals += c.deferrals;
      if (!c.complete) continue;
      ++cs.complete;
      if (!c.uncongested) continue;
      ++cs.uncongested;
      const double g = std::abs(c.gap_error);
      cs.gap_error_max_s = std::max(cs.gap_error_max_s, g);
      if (g <= kGapTol) ++cs.gap_within_tol;
    }
    m.cycles = cs;
  }
  return m;
}

}  // namespace comc::sim
