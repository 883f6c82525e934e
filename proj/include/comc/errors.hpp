#pragma once

#include <stdexcept>
#include <string>

namespace comc {

// Failure modes of model evaluation and planning. Candidate-plan
// infeasibility is signalled through these so callers can't consume
// half-built results.
enum class errc {
  domain,                 // argument outside the physical domain
  degenerate_wave,        // equal densities, no interface between the states
  compaction_infeasible,  // compact state absorbs no vehicles from the demand state
  kinematics_infeasible,  // platoon cannot reach the cooperative speed by the merge point
  infeasible_pair,        // empty feasible distance interval for (n, v_c)
  infeasible_speed,       // no platoon size works at this cooperative speed
  scenario_infeasible,    // no feasible plan anywhere in the search domain
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::domain: return "domain";
    case errc::degenerate_wave: return "degenerate_wave";
    case errc::compaction_infeasible: return "compaction_infeasible";
    case errc::kinematics_infeasible: return "kinematics_infeasible";
    case errc::infeasible_pair: return "infeasible_pair";
    case errc::infeasible_speed: return "infeasible_speed";
    case errc::scenario_infeasible: return "scenario_infeasible";
  }
  return "unknown";
}

class model_error : public std::runtime_error {
 public:
  model_error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace comc
