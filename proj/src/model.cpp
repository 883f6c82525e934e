#include "comc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace comc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_plan_shape(const control_plan& plan, const merge_inputs& in) {
  if (plan.n < 1) throw model_error(errc::domain, "platoon size must be >= 1");
  if (!(plan.d > 0.0)) throw model_error(errc::domain, "coordination distance must be positive");
  if (!(plan.v_c > 0.0) || !(plan.v_c < in.state_o.v))
    throw model_error(errc::domain, "cooperative speed must lie in (0, v_free)");
}

struct wave_context {
  traffic_state state_c;
  double w;  // interface speed (m/s)
};

wave_context make_wave(const control_plan& plan, const merge_inputs& in) {
  const traffic_state c = equilibrium_state(plan.v_c, in.fd);
  return wave_context{c, shockwave_speed(in.state_o, c)};
}

// Per-cycle mainline delay with the vehicle count left as a real number.
double mainline_closed(double m, const control_plan& plan, const merge_inputs& in,
                       const wave_context& wave) {
  const double v_o = in.state_o.v;
  const double h_o = in.state_o.h;
  const double x = plan.d + in.d_prime;
  return m * (v_o - plan.v_c) / plan.v_c *
         (x / v_o - (m - 1.0) * wave.w * h_o / (2.0 * (v_o - wave.w)));
}

double relaxed_count(const control_plan& plan, const merge_inputs& in,
                     const wave_context& wave) {
  const double x = plan.d + in.d_prime;
  return x / in.state_o.h * (1.0 / wave.w - 1.0 / in.state_o.v);
}

double ramp_closed(const control_plan& plan, const merge_inputs& in, double h_c) {
  const double n = plan.n;
  const double x = plan.d + in.d_prime;
  return n * (in.v_r / (2.0 * in.b) + x / plan.v_c - n * h_c -
              (plan.d - n * h_c * plan.v_c) / (2.0 * in.v_r) -
              in.d_prime / in.state_o.v + (n - 1.0) / (2.0 * in.lambda));
}

}  // namespace

void merge_inputs::validate() const {
  fd.validate();
  if (!(state_o.v > 0.0) || !(state_o.q > 0.0))
    throw model_error(errc::domain, "demand state must have positive speed and flow");
  if (std::abs(state_o.v - fd.v_free) > 1e-9 * fd.v_free)
    throw model_error(errc::domain, "demand state must travel at the design speed");
  if (!(d_prime > 0.0)) throw model_error(errc::domain, "merge-area length must be positive");
  if (!(lambda > 0.0)) throw model_error(errc::domain, "ramp arrival rate must be positive");
  if (!(v_r > 0.0)) throw model_error(errc::domain, "ramp design speed must be positive");
  if (!(b > 0.0) || !(a_max > 0.0))
    throw model_error(errc::domain, "acceleration limits must be positive");
  if (w_m < 0.0 || w_r < 0.0)
    throw model_error(errc::domain, "objective weights must be non-negative");
}

double shockwave_duration(const control_plan& plan, const merge_inputs& in) {
  validate_plan_shape(plan, in);
  const wave_context wave = make_wave(plan, in);
  return (plan.d + in.d_prime) / wave.w;
}

int cooperative_count(const control_plan& plan, const merge_inputs& in) {
  validate_plan_shape(plan, in);
  const wave_context wave = make_wave(plan, in);
  const double raw = relaxed_count(plan, in, wave);
  return std::max(1, static_cast<int>(std::ceil(raw)));
}

double mainline_delay_sum(const control_plan& plan, const merge_inputs& in) {
  validate_plan_shape(plan, in);
  const wave_context wave = make_wave(plan, in);
  const double m = std::max(1.0, std::ceil(relaxed_count(plan, in, wave)));
  return mainline_closed(m, plan, in, wave);
}

platoon_kinematics_info platoon_kinematics(const control_plan& plan,
                                           const merge_inputs& in) {
  validate_plan_shape(plan, in);
  const double h_c = equilibrium_state(plan.v_c, in.fd).h;
  const double run = plan.d - plan.n * h_c * plan.v_c;  // distance left to gain speed
  if (!(run > 0.0))
    throw model_error(errc::kinematics_infeasible,
                      "platoon cannot reach the cooperative speed by the merge point");
  platoon_kinematics_info k;
  k.t_br = in.v_r / in.b;
  k.s_br = in.v_r * in.v_r / (2.0 * in.b);
  k.t_acc = plan.d / plan.v_c - plan.n * h_c;
  k.a = plan.v_c * plan.v_c / run;
  k.s_wp = run / 2.0;
  k.t_cr = in.d_prime / plan.v_c;
  k.t_wt.resize(plan.n);
  for (int j = 1; j <= plan.n; ++j) k.t_wt[j - 1] = (plan.n - j) / in.lambda;
  return k;
}

double ramp_delay_sum(const control_plan& plan, const merge_inputs& in) {
  validate_plan_shape(plan, in);
  const double h_c = equilibrium_state(plan.v_c, in.fd).h;
  if (!(plan.d - plan.n * h_c * plan.v_c > 0.0))
    throw model_error(errc::kinematics_infeasible,
                      "platoon cannot reach the cooperative speed by the merge point");
  return ramp_closed(plan, in, h_c);
}

delay_report total_delay(const control_plan& plan, const merge_inputs& in) {
  validate_plan_shape(plan, in);
  const wave_context wave = make_wave(plan, in);
  const double h_c = wave.state_c.h;
  if (!(plan.d - plan.n * h_c * plan.v_c > 0.0))
    throw model_error(errc::kinematics_infeasible,
                      "platoon cannot reach the cooperative speed by the merge point");
  delay_report rep;
  rep.m = std::max(1, static_cast<int>(std::ceil(relaxed_count(plan, in, wave))));
  rep.t_sw = (plan.d + in.d_prime) / wave.w;
  rep.mainline_sum = mainline_closed(rep.m, plan, in, wave);
  rep.ramp_sum = ramp_closed(plan, in, h_c);
  rep.cycle_interval = plan.n / in.lambda;
  rep.r = 3600.0 * in.lambda / plan.n;
  rep.total = (in.w_m * rep.mainline_sum + in.w_r * rep.ramp_sum) * rep.r;
  return rep;
}

double total_delay_relaxed(const control_plan& plan, const merge_inputs& in) {
  validate_plan_shape(plan, in);
  const wave_context wave = make_wave(plan, in);
  const double h_c = wave.state_c.h;
  if (!(plan.d - plan.n * h_c * plan.v_c > 0.0))
    throw model_error(errc::kinematics_infeasible,
                      "platoon cannot reach the cooperative speed by the merge point");
  const double m = relaxed_count(plan, in, wave);
  const double mainline = mainline_closed(m, plan, in, wave);
  const double ramp = ramp_closed(plan, in, h_c);
  return (in.w_m * mainline + in.w_r * ramp) * 3600.0 * in.lambda / plan.n;
}

bool feasibility_report::feasible() const {
  return std::all_of(items.begin(), items.end(),
                     [](const constraint_margin& c) { return c.satisfied; });
}

double feasibility_report::min_margin() const {
  double m = kInf;
  for (const auto& c : items) m = std::min(m, c.margin);
  return m;
}

const constraint_margin& feasibility_report::tightest() const {
  const constraint_margin* best = &items[0];
  for (const auto& c : items)
    if (c.margin < best->margin) best = &c;
  return *best;
}

feasibility_report check_constraints(const control_plan& plan, const merge_inputs& in) {
  feasibility_report rep;
  const double v_o = in.state_o.v;
  const double h_o = in.state_o.h;

  // e: structural validity of the decision triple.
  const bool shape_ok = plan.n >= 1 && plan.d > 0.0 && plan.v_c > 0.0 && plan.v_c < v_o;
  double shape_margin = -1.0;
  if (shape_ok) shape_margin = std::min(plan.d, v_o - plan.v_c);
  rep.items[4] = {'e', "decision variables structurally valid", shape_ok, shape_margin};
  if (!shape_ok) {
    rep.items[0] = {'a', "created gap admits the platoon", false, -kInf};
    rep.items[1] = {'b', "previous wave dissipated before the next cycle", false, -kInf};
    rep.items[2] = {'c', "cooperative speed at or above the critical speed", false, -kInf};
    rep.items[3] = {'d', "release acceleration within the ramp limit", false, -kInf};
    return rep;
  }

  const double h_c = equilibrium_state(plan.v_c, in.fd).h;

  // a: gap created ahead of the facilitating vehicle vs gap the platoon needs.
  const double g_create = h_o + plan.d / plan.v_c - plan.d / v_o;
  const double g_require = (plan.n + 1) * h_c;
  const double margin_a = g_create - g_require;
  rep.items[0] = {'a', "created gap admits the platoon", margin_a >= 0.0, margin_a};

  // b: the slowdown wave of one cycle dissipates within the cycle interval.
  double margin_b = -kInf;
  bool have_wave = false;
  try {
    const wave_context wave = make_wave(plan, in);
    margin_b = plan.n / in.lambda - (plan.d + in.d_prime) / wave.w;
    have_wave = true;
  } catch (const model_error&) {
  }
  rep.items[1] = {'b', "previous wave dissipated before the next cycle",
                  have_wave && margin_b >= 0.0, margin_b};

  // c: cooperative speed keeps the mainline above its critical speed.
  const double margin_c = plan.v_c - in.fd.v_crit;
  rep.items[2] = {'c', "cooperative speed at or above the critical speed",
                  margin_c >= 0.0, margin_c};

  // d: the release acceleration the platoon needs vs the ramp limit.
  const double run = plan.d - plan.n * h_c * plan.v_c;
  double margin_d = -kInf;
  bool accel_ok = false;
  if (run > 0.0) {
    margin_d = in.a_max - plan.v_c * plan.v_c / run;
    accel_ok = margin_d >= 0.0;
  }
  rep.items[3] = {'d', "release acceleration within the ramp limit", accel_ok, margin_d};

  return rep;
}

}  // namespace comc
