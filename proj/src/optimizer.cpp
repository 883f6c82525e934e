#include "comc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

namespace comc {

namespace {

// Per-cooperative-speed quantities every candidate at that speed shares.
struct speed_context {
  double v_c;  // m/s
  double h_c;  // equilibrium headway at v_c (s)
  double w;    // interface speed (m/s), > 0
};

// Exception-free variant of the public factories for the sweep hot path.
// Returns nothing when the speed is out of range or no compacting interface
// exists (the sweep treats such speeds as infeasible).
std::optional<speed_context> try_context(double v_c, const merge_inputs& in) {
  if (!(v_c > 0.0) || !(v_c < in.state_o.v)) return std::nullopt;
  const traffic_state c = equilibrium_state(v_c, in.fd);
  const double dk = c.k - in.state_o.k;
  if (dk == 0.0) return std::nullopt;
  const double w = (c.q - in.state_o.q) / dk;
  if (!(w > 0.0)) return std::nullopt;
  return speed_context{v_c, c.h, w};
}

// Headway assumed for the vehicle immediately upstream of the created gap.
double follower_headway(const merge_inputs& in, gap_rule rule) {
  return rule == gap_rule::mean_arrival
             ? in.state_o.h
             : equilibrium_state(in.fd.v_free, in.fd).h;
}

d_interval bounds_impl(int n, const speed_context& cx, const merge_inputs& in,
                       gap_rule rule) {
  const double v_o = in.state_o.v;
  // Gap opened by slowing one vehicle over d must hold n followers plus the
  // slowed vehicle itself at the compact headway.
  const double gap_lb = v_o * cx.v_c / (v_o - cx.v_c) *
                        ((n + 1) * cx.h_c - follower_headway(in, rule));
  // The platoon must reach v_c before the merge point within a_max.
  const double accel_lb = cx.v_c * cx.v_c / in.a_max + n * cx.h_c * cx.v_c;
  // The wave must dissipate within one cycle interval.
  const double ub = n * cx.w / in.lambda - in.d_prime;
  return d_interval{std::max(gap_lb, accel_lb), ub};
}

quadratic_objective quad_impl(int n, const speed_context& cx,
                              const merge_inputs& in, const d_interval& b) {
  const double v_o = in.state_o.v;
  const double h_o = in.state_o.h;
  const double r = 3600.0 * in.lambda / n;
  const double slow = (v_o - cx.v_c) / cx.v_c;           // fractional slowdown
  const double mu = (v_o - cx.w) / (h_o * cx.w * v_o);   // wave vehicles per metre
  const double wv = cx.w * h_o / (2.0 * (v_o - cx.w));   // wave spacing term
  const double pm = in.w_m * slow * mu;
  quadratic_objective q;
  q.a_coef = r * pm / (2.0 * v_o);
  q.b_coef = r * (pm * (in.d_prime / v_o + wv) +
                  in.w_r * n * (1.0 / cx.v_c - 1.0 / (2.0 * in.v_r)));
  q.c_coef =
      r * (pm * (in.d_prime * in.d_prime / (2.0 * v_o) + wv * in.d_prime) +
           in.w_r * n *
               (in.v_r / (2.0 * in.b) + in.d_prime / cx.v_c - n * cx.h_c +
                n * cx.h_c * cx.v_c / (2.0 * in.v_r) - in.d_prime / v_o +
                (n - 1.0) / (2.0 * in.lambda)));
  q.d_lb = b.lb;
  q.d_ub = b.ub;
  return q;
}

double clamp_vertex(const quadratic_objective& q) {
  double d;
  if (q.a_coef > 0.0) {
    d = -q.b_coef / (2.0 * q.a_coef);
  } else {
    d = q.b_coef > 0.0 ? q.d_lb : q.d_ub;  // degenerate: linear objective
  }
  return std::clamp(d, q.d_lb, q.d_ub);
}

// Best (n, d) at one cooperative speed, or nothing if no size fits.
// Ascending scan with strict improvement keeps the smaller n on ties.
std::optional<n_choice> best_n_at(const speed_context& cx,
                                  const merge_inputs& in,
                                  const solve_options& opt) {
  std::optional<n_choice> best;
  for (int n = 1; n <= opt.n_cap; ++n) {
    const d_interval b = bounds_impl(n, cx, in, opt.gap);
    if (!b.valid()) continue;
    const quadratic_objective q = quad_impl(n, cx, in, b);
    const double d = clamp_vertex(q);
    const double val = q.eval(d);
    if (!best || val < best->relaxed_total) best = n_choice{n, d, val};
  }
  return best;
}

struct candidate {
  double v_kmh;
  n_choice pick;
};

// a strictly better than b under (objective, then larger v_c, then smaller n).
bool better(const candidate& a, const candidate& b) {
  const double tol =
      1e-9 * std::max({1.0, std::abs(a.pick.relaxed_total),
                       std::abs(b.pick.relaxed_total)});
  if (a.pick.relaxed_total < b.pick.relaxed_total - tol) return true;
  if (b.pick.relaxed_total < a.pick.relaxed_total - tol) return false;
  if (a.v_kmh != b.v_kmh) return a.v_kmh > b.v_kmh;
  return a.pick.n < b.pick.n;
}

std::optional<n_choice> pick_at(double v_kmh, const merge_inputs& in,
                                const solve_options& opt) {
  const auto cx = try_context(units::kmh(v_kmh), in);
  if (!cx) return std::nullopt;
  return best_n_at(*cx, in, opt);
}

std::optional<n_choice> pick_fixed_n(int n, double v_kmh,
                                     const merge_inputs& in,
                                     const solve_options& opt) {
  const auto cx = try_context(units::kmh(v_kmh), in);
  if (!cx) return std::nullopt;
  const d_interval b = bounds_impl(n, *cx, in, opt.gap);
  if (!b.valid()) return std::nullopt;
  const quadratic_objective q = quad_impl(n, *cx, in, b);
  const double d = clamp_vertex(q);
  return n_choice{n, d, q.eval(d)};
}

solution finish(const candidate& win, const merge_inputs& in,
                std::vector<breakpoint_info> breakpoints) {
  solution s;
  s.plan = control_plan{win.pick.n, units::kmh(win.v_kmh), win.pick.d};
  s.report = total_delay(s.plan, in);
  s.relaxed_total = win.pick.relaxed_total;
  s.breakpoints = std::move(breakpoints);
  return s;
}

[[noreturn]] void throw_infeasible(const merge_inputs& in,
                                   const solve_options& opt) {
  // Diagnostic rescan on a coarse grid: report the least-violating triple.
  feasibility_report best{};
  double best_min = -std::numeric_limits<double>::infinity();
  bool have = false;
  const double lo = units::to_kmh(in.fd.v_crit);
  const double hi = units::to_kmh(in.state_o.v);
  for (double v_kmh = lo; v_kmh < hi; v_kmh += 1.0) {
    const double v_c = units::kmh(v_kmh);
    const double h_c = equilibrium_state(v_c, in.fd).h;
    for (int n = 1; n <= opt.n_cap; ++n) {
      const double gap_lb = in.state_o.v * v_c / (in.state_o.v - v_c) *
                            ((n + 1) * h_c - follower_headway(in, opt.gap));
      const double accel_lb = v_c * v_c / in.a_max + n * h_c * v_c;
      const control_plan p{n, v_c, std::max({gap_lb, accel_lb, 1.0})};
      const feasibility_report rep = check_constraints(p, in);
      const double m = rep.min_margin();
      if (!have || m > best_min) {
        best = rep;
        best_min = m;
        have = true;
      }
    }
  }
  throw infeasible_scenario_error(
      "no coordination plan satisfies the constraints for these demands",
      best);
}

}  // namespace

d_interval d_bounds(int n, double v_c, const merge_inputs& in, gap_rule rule) {
  if (n < 1) throw model_error(errc::domain, "platoon size must be >= 1");
  if (!(v_c > 0.0) || !(v_c < in.state_o.v))
    throw model_error(errc::domain, "cooperative speed must lie in (0, v_free)");
  const traffic_state c = equilibrium_state(v_c, in.fd);
  const double w = shockwave_speed(in.state_o, c);  // throws when no wave
  return bounds_impl(n, speed_context{v_c, c.h, w}, in, rule);
}

quadratic_objective quadratic_form(int n, double v_c, const merge_inputs& in,
                                   gap_rule rule) {
  if (n < 1) throw model_error(errc::domain, "platoon size must be >= 1");
  if (!(v_c > 0.0) || !(v_c < in.state_o.v))
    throw model_error(errc::domain, "cooperative speed must lie in (0, v_free)");
  const traffic_state c = equilibrium_state(v_c, in.fd);
  const double w = shockwave_speed(in.state_o, c);
  const speed_context cx{v_c, c.h, w};
  return quad_impl(n, cx, in, bounds_impl(n, cx, in, rule));
}

double optimal_d(int n, double v_c, const merge_inputs& in, gap_rule rule) {
  const quadratic_objective q = quadratic_form(n, v_c, in, rule);
  if (!(q.d_lb <= q.d_ub) || !(q.d_ub > 0.0))
    throw model_error(errc::infeasible_pair,
                      "no coordination distance fits this (n, v_c) pair");
  return clamp_vertex(q);
}

n_choice optimal_n_given_vc(double v_c, const merge_inputs& in,
                            const solve_options& opt) {
  const auto cx = try_context(v_c, in);
  const auto best = cx ? best_n_at(*cx, in, opt) : std::nullopt;
  if (!best)
    throw model_error(errc::infeasible_speed,
                      "no platoon size is feasible at this cooperative speed");
  return *best;
}

solution solve(const merge_inputs& in, const solve_options& opt) {
  in.validate();
  const double lo_kmh = units::to_kmh(in.fd.v_crit);
  const double hi_kmh = units::to_kmh(in.state_o.v);

  struct sample {
    double v_kmh;
    std::optional<n_choice> pick;
  };
  std::vector<sample> grid;
  for (int i = 0;; ++i) {
    const double v = lo_kmh + i * opt.grid_step_kmh;
    if (v >= hi_kmh - 1e-9) break;
    grid.push_back({v, pick_at(v, in, opt)});
  }

  // Maximal runs of consecutive samples sharing the same optimal n.
  struct run {
    size_t first, last;
    int n;
  };
  std::vector<run> runs;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!grid[i].pick) continue;
    if (!runs.empty() && runs.back().last == i - 1 &&
        runs.back().n == grid[i].pick->n) {
      runs.back().last = i;
    } else {
      runs.push_back({i, i, grid[i].pick->n});
    }
  }
  if (runs.empty()) throw_infeasible(in, opt);

  std::vector<candidate> cands;
  std::vector<breakpoint_info> breakpoints;
  for (size_t r = 0; r < runs.size(); ++r) {
    const run& seg = runs[r];

    // Best sampled point inside the segment (guards non-monotone interiors).
    candidate sampled{grid[seg.first].v_kmh, *grid[seg.first].pick};
    for (size_t i = seg.first + 1; i <= seg.last; ++i) {
      candidate c{grid[i].v_kmh, *grid[i].pick};
      if (better(c, sampled)) sampled = c;
    }
    cands.push_back(sampled);

    // Refine the right edge of the segment: the largest speed at which this
    // n is still the pick.
    double lo = grid[seg.last].v_kmh;
    double hi = seg.last + 1 < grid.size() ? grid[seg.last + 1].v_kmh : hi_kmh;
    while (hi - lo > opt.refine_tol_kmh) {
      const double mid = 0.5 * (lo + hi);
      const auto p = pick_at(mid, in, opt);
      if (p && p->n == seg.n) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    if (const auto edge = pick_fixed_n(seg.n, lo, in, opt))
      cands.push_back({lo, *edge});

    const bool adjacent =
        r + 1 < runs.size() && runs[r + 1].first == seg.last + 1;
    breakpoints.push_back({units::kmh(lo), seg.n,
                           adjacent ? runs[r + 1].n : 0});
  }

  candidate win = cands.front();
  for (const candidate& c : cands)
    if (better(c, win)) win = c;
  return finish(win, in, std::move(breakpoints));
}

solution brute_force_solve(const merge_inputs& in, double vc_step_kmh,
                           const solve_options& opt) {
  in.validate();
  if (!(vc_step_kmh > 0.0))
    throw model_error(errc::domain, "grid step must be positive");
  const double lo_kmh = units::to_kmh(in.fd.v_crit);
  const double hi_kmh = units::to_kmh(in.state_o.v);
  std::optional<candidate> win;
  for (int i = 0;; ++i) {
    const double v = lo_kmh + i * vc_step_kmh;
    if (v >= hi_kmh - 1e-9) break;
    const auto p = pick_at(v, in, opt);
    if (!p) continue;
    const candidate c{v, *p};
    if (!win || better(c, *win)) win = c;
  }
  if (!win) throw_infeasible(in, opt);
  return finish(*win, in, {});
}

int max_ramp_flow(double q_main_vph, const merge_inputs& in_template,
                  const solve_options& opt) {
  if (!(q_main_vph > 0.0))
    throw model_error(errc::domain, "mainline demand must be positive");
  merge_inputs in = in_template;
  in.state_o = demand_state(units::vph(q_main_vph), in.fd.v_free);

  const double lo_kmh = units::to_kmh(in.fd.v_crit);
  const double hi_kmh = units::to_kmh(in.state_o.v);
  const auto feasible = [&](int q_ramp_vph) {
    in.lambda = units::vph(static_cast<double>(q_ramp_vph));
    for (int i = 0;; ++i) {
      const double v = lo_kmh + i * opt.boundary_scan_kmh;
      if (v >= hi_kmh - 1e-9) break;
      const auto cx = try_context(units::kmh(v), in);
      if (!cx) continue;
      for (int n = 1; n <= opt.n_cap; ++n)
        if (bounds_impl(n, *cx, in, opt.gap).valid()) return true;
    }
    return false;
  };

  if (!feasible(1)) return 0;
  int lo = 1, hi = 2;
  while (hi < 36000 && feasible(hi)) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace comc
