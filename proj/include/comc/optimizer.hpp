#pragma once

#include <vector>

#include "comc/model.hpp"

namespace comc {

// How the lower bound on the coordination distance sizes the created gap.
//   mean_arrival   — assume upstream vehicles follow at the demand headway.
//   tight_follower — assume the worst case: vehicles bunched at the
//                    equilibrium headway of the design speed.  This is the
//                    robust choice and the planner default; a gap sized this
//                    way admits the platoon no matter how arrivals cluster.
enum class gap_rule { mean_arrival, tight_follower };

struct solve_options {
  double grid_step_kmh = 0.05;    // cooperative-speed sweep resolution
  double refine_tol_kmh = 1e-4;   // bisection width for segment edges
  int n_cap = 50;                 // largest platoon size considered
  gap_rule gap = gap_rule::tight_follower;
  double boundary_scan_kmh = 0.5; // coarse grid used by max_ramp_flow
};

// Valid range for the coordination distance at a fixed (n, v_c).
struct d_interval {
  double lb = 0.0;
  double ub = 0.0;
  bool valid() const { return lb <= ub && ub > 0.0; }
};

// Cycle delay at fixed (n, v_c) as a polynomial in the coordination
// distance: total(d) = a_coef*d^2 + b_coef*d + c_coef, valid on [d_lb, d_ub].
struct quadratic_objective {
  double a_coef = 0.0;
  double b_coef = 0.0;
  double c_coef = 0.0;
  double d_lb = 0.0;
  double d_ub = 0.0;
  double eval(double d) const { return (a_coef * d + b_coef) * d + c_coef; }
};

struct n_choice {
  int n = 0;
  double d = 0.0;
  double relaxed_total = 0.0;
};

// Cooperative speed at which the optimal platoon size changes.  n_low is
// optimal just below v_c, n_high just above (0 when no size is feasible).
struct breakpoint_info {
  double v_c = 0.0;
  int n_low = 0;
  int n_high = 0;
};

struct solution {
  control_plan plan;
  delay_report report;          // evaluated with the integral vehicle count
  double relaxed_total = 0.0;   // objective value the search minimised
  std::vector<breakpoint_info> breakpoints;
};

// Thrown by solve() when no (n, v_c, d) satisfies the constraints; carries
// the margins of the least-violating candidate for diagnostics.
class infeasible_scenario_error : public model_error {
 public:
  infeasible_scenario_error(std::string what, feasibility_report closest)
      : model_error(errc::scenario_infeasible, std::move(what)),
        closest_(std::move(closest)) {}
  const feasibility_report& closest() const { return closest_; }

 private:
  feasibility_report closest_;
};

d_interval d_bounds(int n, double v_c, const merge_inputs& in,
                    gap_rule rule = gap_rule::mean_arrival);

quadratic_objective quadratic_form(int n, double v_c, const merge_inputs& in,
                                   gap_rule rule = gap_rule::mean_arrival);

// Minimiser of the quadratic over its valid range; throws infeasible_pair
// when the range is empty.
double optimal_d(int n, double v_c, const merge_inputs& in,
                 gap_rule rule = gap_rule::mean_arrival);

// Best platoon size at a fixed cooperative speed (ties favour the smaller
// platoon); throws infeasible_speed when no size is feasible.
n_choice optimal_n_given_vc(double v_c, const merge_inputs& in,
                            const solve_options& opt = {});

solution solve(const merge_inputs& in, const solve_options& opt = {});

// Exhaustive reference search on a fixed grid, no edge refinement.  Slow;
// intended as an independent check of solve().
solution brute_force_solve(const merge_inputs& in, double vc_step_kmh = 0.01,
                           const solve_options& opt = {});

// Largest ramp demand (veh/h, integral) for which any plan is feasible at
// the given mainline demand; 0 when none is.  in_template supplies
// everything except the two demands.
int max_ramp_flow(double q_main_vph, const merge_inputs& in_template,
                  const solve_options& opt = {});

}  // namespace comc
