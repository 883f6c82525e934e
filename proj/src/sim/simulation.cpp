#include "comc/sim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "comc/errors.hpp"
#include "comc/sim/arrivals.hpp"
#include "comc/sim/car_following.hpp"

namespace comc::sim {

namespace {

constexpr double kStopSpeed = 0.05;     // below this a vehicle counts as stopped
constexpr double kEntryClear = 0.5;     // spawn headroom beyond the standstill gap (m)
constexpr double kFreeShare = 0.98;     // share of the free speed counting as uncongested
constexpr double kForceWindow = 30.0;  // cooperative-yield window before the lane end (m)

// Deceleration lead-in: distance before a target point at which a vehicle at
// speed v must start braking at rate b so it passes the point with the same
// timing a constant-speed arrival followed by an instant drop to v_c would
// have had. Starting exactly this early cancels the early-arrival bias that
// braking after the point would cause.
double decel_lead_in(double v, double v_c, double b) {
  return v * (v - v_c) / (2.0 * b);
}

class engine {
 public:
  explicit engine(const run_spec& s)
      : s_(s),
        fd_(s.inputs.fd),
        geom_(s.geom),
        lim_{s.inputs.a_max, s.inputs.b, 6.0, s.cfg.dt},
        dt_(s.cfg.dt),
        v_free_(fd_.v_free),
        v_ramp_(s.inputs.v_r),
        em_(geom_.em_pos(s.inputs.d_prime)),
        comc_(s.cfg.mode == sim_mode::comc),
        nose_(geom_.nose_path()),
        accel_end_(geom_.accel_end_path()),
        map_off_(geom_.mp_pos() - geom_.ramp_len) {
    if (comc_) {
      const control_plan& p = *s.plan;
      const auto kin = platoon_kinematics(p, s.inputs);
      n_plan_ = p.n;
      v_c_ = p.v_c;
      sc_ = geom_.sc_pos(p.d);
      wp_ = geom_.wp_pos(kin.s_wp);
      a_rel_ = kin.a;
      h_c_ = equilibrium_state(p.v_c, fd_).h;
      rho_ = h_c_ - (fd_.cc0 + fd_.veh_len) / p.v_c;
      t_sw_ = shockwave_duration(p, s.inputs);
    }
    sched_ = generate_arrivals(s.cfg.seed, s.inputs.state_o.q, s.inputs.lambda,
                               s.cfg.duration, fd_);
    log_every_ = std::max<long>(1, std::lround(1.0 / dt_));
    log_.v_free = v_free_;
    log_.v_ramp = v_ramp_;
  }

  run_result go() {
    const long steps = std::llround(s_.cfg.duration / dt_);
    for (long k = 0; k < steps; ++k) {
      const double t = k * dt_;
      insert_arrivals(t);
      if (k % log_every_ == 0) sample_rows(t);
      if (comc_)
        controller_step(t);
      else
        base_forcing();
      advance(t);
    }
    finalize();
    run_result out;
    out.log = std::move(log_);
    out.metrics = compute_metrics(out.log, geom_, s_.cfg);
    return out;
  }

 private:
  // --- demand -------------------------------------------------------------

  void insert_arrivals(double t) {
    while (next_main_ < sched_.mainline.size() &&
           sched_.mainline[next_main_] <= t + 1e-9) {
      ++next_main_;
      ++pend_main_;
    }
    while (next_ramp_ < sched_.ramp.size() &&
           sched_.ramp[next_ramp_] <= t + 1e-9) {
      ++next_ramp_;
      ++pend_ramp_;
    }
    // Arrivals that find the entry blocked wait outside and enter as soon as
    // space opens, so demand is carried over rather than dropped.
    while (pend_main_ > 0 && try_spawn(vehicle_origin::mainline, t)) --pend_main_;
    while (pend_ramp_ > 0 && try_spawn(vehicle_origin::ramp, t)) --pend_ramp_;
  }

  bool try_spawn(vehicle_origin origin, double t) {
    const bool main = origin == vehicle_origin::mainline;
    std::vector<int>& lane = main ? main_lane_ : ramp_lane_;
    double v = main ? v_free_ : v_ramp_;
    if (!lane.empty()) {
      const vehicle& last = arena_[lane.front()];
      const double net = last.pos - fd_.veh_len;  // new front bumper at 0
      if (net < fd_.cc0 + kEntryClear) return false;
      v = std::min(v, safe_speed(net, last.speed, fd_, lim_.b));
    }
    vehicle veh;
    veh.id = int(arena_.size()) + 1;
    veh.origin = origin;
    veh.speed = v;
    veh.entry_time = t;
    veh.on_main = main;
    arena_.push_back(veh);
    vnext_.push_back(v);
    lane.insert(lane.begin(), int(arena_.size()) - 1);
    ++log_.entered;
    return true;
  }

  // --- coordination -------------------------------------------------------

  // One cycle: wait out the previous slowdown wave, require a full platoon
  // standing at the waiting position, then appoint the nearest upstream
  // mainline vehicle that can still begin a comfortable deceleration before
  // the speed-change position. The platoon release is pinned to the time the
  // appointed vehicle would cross that position had it kept its speed; the
  // actual deceleration starts one lead-in early so the merge-point arrival
  // matches that constant-speed schedule exactly.
  void controller_step(double t) {
    if (t - last_cycle_ < t_sw_ - 1e-9) return;

    std::vector<int> members;
    for (auto it = ramp_lane_.rbegin();
         it != ramp_lane_.rend() && int(members.size()) < n_plan_; ++it) {
      if (arena_[*it].released) continue;
      members.push_back(*it);
    }
    if (int(members.size()) < n_plan_) return;
    for (int idx : members)
      if (!arena_[idx].queued) return;

    int facil = -1;
    int deferrals = 0;
    double lead_in = 0.0;
    for (auto it = main_lane_.rbegin(); it != main_lane_.rend(); ++it) {
      const vehicle& v = arena_[*it];
      if (v.pos >= sc_ || v.role != vehicle_role::normal) continue;
      if (v.speed < v_c_) {
        ++deferrals;  // slower than the plan speed: cannot create the gap
        continue;
      }
      const double u = decel_lead_in(v.speed, v_c_, lim_.b);
      if (v.pos > sc_ - u) continue;  // no room left to start the slowdown
      facil = *it;
      lead_in = u;
      break;
    }
    if (facil < 0) return;

    vehicle& f = arena_[facil];
    const double v0 = f.speed;
    const double t_rel = t + (sc_ - f.pos) / v0;
    f.role = vehicle_role::facilitating;
    f.scripted = true;
    f.fv0 = v0;
    f.ft1 = t + (sc_ - lead_in - f.pos) / v0;
    for (int j = 0; j < n_plan_; ++j) {
      vehicle& m = arena_[members[j]];
      m.role = vehicle_role::platoon_member;
      m.released = true;
      m.scripted = true;
      m.pt0 = t_rel + j * rho_;
    }

    cycle_record rec;
    rec.t_start = t;
    rec.t_release = t_rel;
    rec.v0 = v0;
    rec.lead_in = lead_in;
    rec.naive_bias = (v0 - v_c_) * (v0 - v_c_) / (2.0 * lim_.b * v_c_);
    rec.n = n_plan_;
    rec.deferrals = deferrals;
    rec.uncongested = v0 >= kFreeShare * v_free_;
    rec.t_sw = t_sw_;
    rec.facil_id = f.id;
    rec.leader_id = arena_[members[0]].id;
    log_.cycles.push_back(rec);
    last_cycle_ = t;
  }

  // In uncoordinated operation a merger approaching the end of the
  // acceleration lane is yielded to: the nearest mainline vehicle behind its
  // mapped position treats it as a leader, opening a gap. Only a vehicle
  // that can still stop outside the merger's standstill gap is asked to
  // yield; one already level with or inside that gap cannot fall back, so it
  // drives on and the next vehicle upstream yields instead (otherwise the
  // pair deadlocks: the blocked yielder pins the gap below the admission
  // minimum forever).
  void base_forcing() {
    forced_follower_ = -1;
    forced_merger_ = -1;
    if (ramp_lane_.empty()) return;
    const int m = ramp_lane_.back();
    if (arena_[m].pos < accel_end_ - kForceWindow) return;
    forced_merger_ = m;
    const double behind = arena_[m].pos + map_off_ - fd_.veh_len - fd_.cc0;
    auto ub = std::upper_bound(
        main_lane_.begin(), main_lane_.end(), behind,
        [&](double x, int i) { return x < arena_[i].pos; });
    if (ub == main_lane_.begin()) return;
    forced_follower_ = *std::prev(ub);
  }

  // --- motion -------------------------------------------------------------

  void advance(double t) {
    decide_lane(main_lane_, true, t + dt_);
    decide_lane(ramp_lane_, false, t + dt_);
    apply_lane(main_lane_, true, t);
    apply_lane(ramp_lane_, false, t);
    post_move(t);
  }

  // Commanded speed = desired (or scripted) speed capped by car following;
  // scripts steer the desired speed only, never the safety cap.
  void decide_lane(const std::vector<int>& lane, bool is_main, double tn) {
    for (std::size_t i = 0; i < lane.size(); ++i) {
      const vehicle& v = arena_[lane[i]];
      double want;
      if (is_main) {
        if (v.scripted && v.role == vehicle_role::facilitating)
          want = tn < v.ft1 ? v.fv0
                            : std::max(v_c_, v.fv0 - lim_.b * (tn - v.ft1));
        else if (v.scripted && v.role == vehicle_role::platoon_member)
          want = std::min(v_c_, a_rel_ * std::max(0.0, tn - v.pt0));
        else
          want = v_free_;
      } else if (comc_) {
        if (v.released)
          want = std::min(v_c_, a_rel_ * std::max(0.0, tn - v.pt0));
        else  // wall at the waiting position: stop with the front bumper on it
          want = std::min(v_ramp_,
                          safe_speed(wp_ + fd_.cc0 - v.pos, 0.0, fd_, lim_.b));
      } else {  // wall at the end of the acceleration lane
        want = std::min(
            v_ramp_, safe_speed(accel_end_ + fd_.cc0 - v.pos, 0.0, fd_, lim_.b));
      }
      if (i + 1 < lane.size()) {
        const vehicle& lead = arena_[lane[i + 1]];
        want = std::min(
            want, safe_speed(lead.pos - fd_.veh_len - v.pos, lead.speed, fd_, lim_.b));
      }
      if (is_main && lane[i] == forced_follower_ && forced_merger_ >= 0) {
        const vehicle& mg = arena_[forced_merger_];
        want = std::min(want, safe_speed(mg.pos + map_off_ - fd_.veh_len - v.pos,
                                         mg.speed, fd_, lim_.b));
      }
      const speed_update up = clamp_speed(v.speed, want, lim_, v.scripted);
      vnext_[lane[i]] = up.v;
      if (up.emergency) ++log_.emergency_brake_events;
    }
  }

  void apply_lane(const std::vector<int>& lane, bool is_main, double t) {
    const double out_x = geom_.total_len() - 100.0;
    const double mp = geom_.mp_pos();
    for (int idx : lane) {
      vehicle& v = arena_[idx];
      const double p0 = v.pos, u0 = v.speed;
      const double u1 = vnext_[idx];
      const double p1 = p0 + u1 * dt_;
      v.speed = u1;
      v.accel = (u1 - u0) / dt_;
      v.pos = p1;
      if (p1 <= p0) continue;
      const auto when = [&](double x) { return t + dt_ * (x - p0) / (p1 - p0); };
      const auto speed_at = [&](double x) {
        return u0 + (u1 - u0) * (x - p0) / (p1 - p0);
      };
      if (is_main) {
        for (double x = (std::floor(p0 / 100.0) + 1.0) * 100.0;
             x <= std::min(p1, out_x) + 1e-12; x += 100.0) {
          if (x < 100.0 - 1e-12) continue;
          log_.crossings.push_back({when(x), speed_at(x), x});
        }
        if (v.origin == vehicle_origin::mainline && v.mark_in < 0 &&
            p0 < 100.0 && p1 >= 100.0)
          v.mark_in = when(100.0);
        if (v.mark_out < 0 && p0 < out_x && p1 >= out_x) v.mark_out = when(out_x);
        if (v.em_cross < 0 && p0 < em_ && p1 >= em_) v.em_cross = when(em_);
        if (v.scripted && v.role == vehicle_role::facilitating && p0 < mp &&
            p1 >= mp)
          note_facil_mp(v.id, when(mp));
      } else {
        if (v.mark_in < 0 && p0 < 100.0 && p1 >= 100.0) v.mark_in = when(100.0);
        if (comc_ && p0 < nose_ && p1 >= nose_)
          switchers_.push_back({idx, when(nose_)});
      }
    }
  }

  void note_facil_mp(int id, double t_cross) {
    for (std::size_t c = open_from_; c < log_.cycles.size(); ++c) {
      cycle_record& rec = log_.cycles[c];
      if (rec.facil_id == id && rec.facil_mp < 0) {
        rec.facil_mp = t_cross;
        return;
      }
    }
  }

  void post_move(double t) {
    if (comc_)
      transfer_platoon();
    else
      merge_base();
    if (comc_) {
      for (int idx : ramp_lane_) {
        vehicle& v = arena_[idx];
        if (!v.released && !v.queued && v.speed < kStopSpeed &&
            v.pos <= wp_ + 0.5)
          v.queued = true;
      }
    }
    for (int idx : main_lane_) {
      vehicle& v = arena_[idx];
      if (v.scripted && v.pos >= em_) {
        v.scripted = false;
        v.role = vehicle_role::normal;
      }
    }
    const double total = geom_.total_len();
    while (!main_lane_.empty()) {
      vehicle& v = arena_[main_lane_.back()];
      if (v.pos - fd_.veh_len <= total) break;
      v.exit_time = t + dt_;
      main_lane_.pop_back();
      ++log_.exited;
    }
    for (std::size_t c = open_from_; c < log_.cycles.size(); ++c) {
      cycle_record& rec = log_.cycles[c];
      if (!rec.complete && rec.facil_mp >= 0 && rec.leader_mp >= 0) {
        rec.gap_error = rec.facil_mp - rec.leader_mp - rec.n * h_c_;
        rec.complete = true;
      }
    }
    while (open_from_ < log_.cycles.size() && log_.cycles[open_from_].complete)
      ++open_from_;
    check_lane(main_lane_, v_free_, t);
    check_lane(ramp_lane_, v_ramp_, t);
    const long live = long(main_lane_.size() + ramp_lane_.size());
    if (log_.entered != live + log_.exited) {
      log_.conservation_ok = false;
      throw sim_fault("headcount mismatch at t=" + std::to_string(t + dt_) +
                          ": entered " + std::to_string(log_.entered) +
                          ", live " + std::to_string(live) + ", exited " +
                          std::to_string(log_.exited),
                      std::move(log_));
    }
  }

  // Platoon vehicles change lanes at the merge point, keeping their position
  // along the path; processed front to back so insertion order is stable.
  void transfer_platoon() {
    for (auto it = switchers_.rbegin(); it != switchers_.rend(); ++it) {
      const int idx = it->first;
      for (std::size_t i = ramp_lane_.size(); i-- > 0;) {
        if (ramp_lane_[i] == idx) {
          ramp_lane_.erase(ramp_lane_.begin() + long(i));
          break;
        }
      }
      vehicle& v = arena_[idx];
      v.on_main = true;
      v.pos += map_off_;
      v.last_leader = -1;
      auto ub = std::upper_bound(
          main_lane_.begin(), main_lane_.end(), v.pos,
          [&](double x, int i2) { return x < arena_[i2].pos; });
      main_lane_.insert(ub, idx);
      for (std::size_t c = open_from_; c < log_.cycles.size(); ++c) {
        cycle_record& rec = log_.cycles[c];
        if (rec.leader_id == v.id && rec.leader_mp < 0) {
          rec.leader_mp = it->second;
          break;
        }
      }
    }
    switchers_.clear();
  }

  // Uncoordinated merging: a vehicle past the nose joins the mainline as soon
  // as both adjacent gaps accommodate the equilibrium spacing at the current
  // speeds. Front to back, so a leading merger cannot be overtaken.
  void merge_base() {
    for (std::size_t i = ramp_lane_.size(); i-- > 0;) {
      const int idx = ramp_lane_[i];
      vehicle& v = arena_[idx];
      if (v.pos < nose_) break;
      const double mx = v.pos + map_off_;
      auto ub = std::upper_bound(
          main_lane_.begin(), main_lane_.end(), mx,
          [&](double x, int i2) { return x < arena_[i2].pos; });
      const vehicle* lead = ub != main_lane_.end() ? &arena_[*ub] : nullptr;
      const vehicle* foll =
          ub != main_lane_.begin() ? &arena_[*std::prev(ub)] : nullptr;
      // The gap admits the merger only if both affected pairs end up at
      // equilibrium spacing or wider AND inside their braking envelopes;
      // otherwise a fast follower behind a slow merger (or a fast merger
      // behind a slow leader) could not stop without violating the
      // standstill gap.
      // The envelope is checked one comfortable braking step ahead: a vehicle
      // tracking its safe speed always sits a hair outside the envelope of
      // the gap it just closed, and without this allowance a crawling
      // follower could never admit anyone.
      const double allow = lim_.b * lim_.dt;
      const double net_lead = lead ? lead->pos - fd_.veh_len - mx : 0.0;
      const double net_foll = foll ? mx - fd_.veh_len - foll->pos : 0.0;
      const double vm = std::max(0.0, v.speed - allow);
      const double vf = foll ? std::max(0.0, foll->speed - allow) : 0.0;
      const bool ok_lead =
          !lead || (net_lead >= fd_.cc0 + fd_.cc1 * v.speed &&
                    vm <= safe_speed(net_lead, lead->speed, fd_, lim_.b));
      const bool ok_foll =
          !foll || (net_foll >= fd_.cc0 + fd_.cc1 * foll->speed &&
                    vf <= safe_speed(net_foll, v.speed, fd_, lim_.b));
      if (ok_lead && ok_foll) {
        v.on_main = true;
        v.pos = mx;
        v.last_leader = -1;
        main_lane_.insert(ub, idx);
        ramp_lane_.erase(ramp_lane_.begin() + long(i));
      }
    }
  }

  void check_lane(const std::vector<int>& lane, double v_des, double t) {
    for (std::size_t i = 0; i + 1 < lane.size(); ++i) {
      const vehicle& f = arena_[lane[i]];
      const vehicle& l = arena_[lane[i + 1]];
      const double net = l.pos - fd_.veh_len - f.pos;
      if (net < fd_.cc0 - 1e-9)
        throw sim_fault("collision at t=" + std::to_string(t + dt_) + ": #" +
                            std::to_string(f.id) + " within the standstill " +
                            "gap of #" + std::to_string(l.id) + ", net gap " +
                            std::to_string(net) + " m",
                        std::move(log_));
      // Steady-following sample: both members settled (matched speeds, no
      // acceleration) with the follower held below its desired speed, so the
      // spacing is set by car following and must sit at the equilibrium gap.
      // Commanded vehicles, a follower yielding to a merger, and pairs that
      // formed only this step (a merge or transfer ahead) are excluded:
      // their spacing is not yet governed by the lane leader.
      const bool settled_pair = arena_[lane[i]].last_leader == l.id;
      arena_[lane[i]].last_leader = l.id;
      if (settled_pair && !f.scripted && lane[i] != forced_follower_ &&
          std::abs(f.speed - l.speed) <= 0.01 && std::abs(f.accel) <= 0.01 &&
          std::abs(l.accel) <= 0.01 && f.speed > 1.0 &&
          f.speed < 0.9 * v_des) {
        const double eq = fd_.cc0 + fd_.cc1 * f.speed;
        ++log_.spacing.samples;
        const double err = std::abs(net - eq) / eq;
        if (err > log_.spacing.max_rel_err) {
          log_.spacing.max_rel_err = err;
          log_.spacing.worst_time = t + dt_;
          log_.spacing.worst_id = f.id;
          log_.spacing.worst_speed = f.speed;
          log_.spacing.worst_net = net;
        }
      }
    }
    // The lane front has no pair; drop its record so it cannot go stale and
    // masquerade as a settled pair after the vehicle changes lanes.
    if (!lane.empty()) arena_[lane.back()].last_leader = -1;
  }

  // --- output -------------------------------------------------------------

  void sample_rows(double t) {
    for (const vehicle& v : arena_) {
      if (v.exit_time) continue;
      log_.rows.push_back({t, v.id, v.origin, v.role,
                           v.on_main ? v.pos : v.pos + map_off_, v.speed,
                           v.accel});
    }
  }

  void finalize() {
    log_.vehicles.reserve(arena_.size());
    for (const vehicle& v : arena_) {
      vehicle_summary s;
      s.id = v.id;
      s.origin = v.origin;
      s.entry_time = v.entry_time;
      s.exit_time = v.exit_time;
      s.mark_in = v.mark_in;
      s.mark_out = v.mark_out;
      s.em_cross = v.em_cross;
      log_.vehicles.push_back(s);
    }
  }

  // --- state --------------------------------------------------------------

  const run_spec& s_;
  fd_params fd_;
  road_geometry geom_;
  cf_limits lim_;
  double dt_;
  double v_free_, v_ramp_, em_;
  bool comc_;
  int n_plan_ = 0;
  double v_c_ = 0.0, sc_ = 0.0, wp_ = 0.0, a_rel_ = 0.0;
  double h_c_ = 0.0, rho_ = 0.0, t_sw_ = 0.0;
  double nose_, accel_end_, map_off_;

  arrival_schedule sched_;
  std::size_t next_main_ = 0, next_ramp_ = 0;
  long pend_main_ = 0, pend_ramp_ = 0;

  std::vector<vehicle> arena_;
  std::vector<int> main_lane_, ramp_lane_;  // arena indices, ascending pos
  std::vector<double> vnext_;
  double last_cycle_ = -1e18;
  long log_every_ = 10;
  int forced_follower_ = -1, forced_merger_ = -1;
  std::vector<std::pair<int, double>> switchers_;  // (index, nose crossing)
  std::size_t open_from_ = 0;  // first cycle still awaiting completion
  trajectory_log log_;
};

}  // namespace

void run_spec::validate() const {
  inputs.validate();
  cfg.validate();
  geom.validate(inputs.d_prime);
  if (cfg.mode != sim_mode::comc) return;
  if (!plan)
    throw model_error(errc::domain, "coordination mode requires a control plan");
  const auto kin = platoon_kinematics(*plan, inputs);  // throws when infeasible
  const double sc = geom.sc_pos(plan->d);
  if (sc - decel_lead_in(inputs.fd.v_free, plan->v_c, inputs.b) < 0.0)
    throw model_error(
        errc::scenario_infeasible,
        "speed-change position leaves no room for the deceleration lead-in");
  const double wp = geom.wp_pos(kin.s_wp);
  if (wp <= 0.0 || wp >= geom.ramp_len)
    throw model_error(errc::scenario_infeasible,
                      "platoon waiting position falls outside the ramp");
  if (wp < kin.s_br)
    throw model_error(errc::scenario_infeasible,
                      "no braking room upstream of the waiting position");
}

run_result run(const run_spec& spec) {
  spec.validate();
  return engine(spec).go();
}

}  // namespace comc::sim
