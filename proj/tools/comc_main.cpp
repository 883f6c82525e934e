#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "comc/io/config.hpp"
#include "comc/io/reports.hpp"
#include "comc/optimizer.hpp"
#include "comc/sim/simulation.hpp"

namespace fs = std::filesystem;
using namespace comc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGeneric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSimFault = 4;

bool is_infeasibility(errc code) {
  switch (code) {
    case errc::degenerate_wave:
    case errc::compaction_infeasible:
    case errc::kinematics_infeasible:
    case errc::infeasible_pair:
    case errc::infeasible_speed:
    case errc::scenario_infeasible:
      return true;
    default:
      return false;
  }
}

std::vector<io::scenario_config> select_scenarios(
    std::vector<io::scenario_config> all,
    const std::vector<std::string>& filter) {
  if (filter.empty()) return all;
  std::vector<io::scenario_config> out;
  for (const std::string& want : filter) {
    auto it = std::find_if(all.begin(), all.end(),
                           [&](const auto& s) { return s.name == want; });
    if (it == all.end())
      throw io::config_error("scenario '" + want + "' not found in config");
    out.push_back(*it);
  }
  return out;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(bytes.data(), std::streamsize(bytes.size()));
}

void print_margins(const feasibility_report& rep) {
  for (const auto& c : rep.items)
    std::fprintf(stderr, "  constraint %c (%s): margin %.4f%s\n", c.id,
                 c.what.c_str(), c.margin, c.satisfied ? "" : "  <-- violated");
}

// --- plan -------------------------------------------------------------—---

int cmd_plan(const std::string& config_path,
             const std::vector<std::string>& filter, bool oracle,
             const std::string& out_path) {
  const auto scenarios = select_scenarios(io::load_config(config_path), filter);
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  bool any_infeasible = false;
  std::printf("%-10s %4s %10s %10s %14s %5s %9s\n", "scenario", "n", "v_c_kmh",
              "d_m", "delay_s_per_h", "m", "t_sw_s");
  for (const auto& sc : scenarios) {
    nlohmann::ordered_json rec;
    rec["scenario"] = sc.name;
    rec["q_main_vph"] = sc.q_main_vph;
    rec["q_ramp_vph"] = sc.q_ramp_vph;
    try {
      const solution sol = solve(sc.inputs);
      std::printf("%-10s %4d %10.2f %10.2f %14.1f %5d %9.1f\n",
                  sc.name.c_str(), sol.plan.n, units::to_kmh(sol.plan.v_c),
                  sol.plan.d, sol.report.total, sol.report.m, sol.report.t_sw);
      rec["plan"] = io::plan_json(sol);
      if (oracle) {
        const solution ref = brute_force_solve(sc.inputs);
        const double rel = std::abs(sol.relaxed_total - ref.relaxed_total) /
                           ref.relaxed_total;
        std::printf("  reference search: n=%d v_c=%.2f km/h d=%.2f m "
                    "(objective diff %.5f%%)\n",
                    ref.plan.n, units::to_kmh(ref.plan.v_c), ref.plan.d,
                    100.0 * rel);
        rec["reference"] = io::plan_json(ref);
        rec["objective_rel_diff"] = rel;
      }
    } catch (const infeasible_scenario_error& e) {
      any_infeasible = true;
      std::printf("%-10s infeasible\n", sc.name.c_str());
      std::fprintf(stderr, "%s: %s\n", sc.name.c_str(), e.what());
      print_margins(e.closest());
      rec["infeasible"] = true;
      rec["reason"] = e.what();
    }
    out.push_back(rec);
  }
  if (!out_path.empty()) write_file(out_path, out.dump(2) + "\n");
  return any_infeasible ? kExitInfeasible : kExitOk;
}

// --- simulate ---------------------------------------------------------—---

struct sim_job {
  const io::scenario_config* sc = nullptr;
  sim::sim_mode mode = sim::sim_mode::base;
  std::uint64_t seed = 0;
  std::optional<control_plan> plan;
};

struct job_result {
  sim::sim_metrics metrics;
  std::uint64_t traj_hash = 0, contour_hash = 0;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / double(v.size());
}

int cmd_simulate(const std::string& config_path,
                 const std::vector<std::string>& filter,
                 const std::vector<std::uint64_t>& seed_override, int parallel,
                 const std::string& out_dir) {
  auto scenarios = select_scenarios(io::load_config(config_path), filter);
  if (!seed_override.empty())
    for (auto& sc : scenarios) sc.seeds = seed_override;

  // Plans are solved once per scenario, before any simulation starts, so an
  // infeasible scenario fails fast.
  std::map<std::string, solution> plans;
  for (const auto& sc : scenarios)
    if (std::count(sc.modes.begin(), sc.modes.end(), sim::sim_mode::comc))
      plans.emplace(sc.name, solve(sc.inputs));

  std::vector<sim_job> jobs;
  for (const auto& sc : scenarios)
    for (const sim::sim_mode mode : sc.modes)
      for (const std::uint64_t seed : sc.seeds) {
        sim_job j;
        j.sc = &sc;
        j.mode = mode;
        j.seed = seed;
        if (mode == sim::sim_mode::comc) j.plan = plans.at(sc.name).plan;
        jobs.push_back(j);
      }

  std::vector<job_result> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> cursor{0};
  const fs::path root(out_dir);
  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= jobs.size()) return;
      const sim_job& j = jobs[i];
      try {
        sim::run_spec spec;
        spec.inputs = j.sc->inputs;
        spec.geom = j.sc->geom;
        spec.cfg = j.sc->cfg;
        spec.cfg.mode = j.mode;
        spec.cfg.seed = j.seed;
        spec.plan = j.plan;
        const sim::run_result res = sim::run(spec);
        const std::string traj = io::format_trajectory_csv(res.log);
        const std::string contour = io::format_contour_csv(res.metrics.contour);
        job_result& out = results[i];
        out.metrics = res.metrics;
        out.traj_hash = io::fnv1a(traj);
        out.contour_hash = io::fnv1a(contour);
        const fs::path dir = root / j.sc->name / to_string(j.mode) /
                             std::to_string(j.seed);
        fs::create_directories(dir);
        write_file(dir / "trajectory.csv", traj);
        write_file(dir / "contour.csv", contour);
        nlohmann::ordered_json mj;
        mj["scenario"] = j.sc->name;
        mj["mode"] = to_string(j.mode);
        mj["seed"] = j.seed;
        mj["trajectory_hash"] = io::hex64(out.traj_hash);
        mj["contour_hash"] = io::hex64(out.contour_hash);
        mj["metrics"] = io::metrics_json(res.metrics);
        write_file(dir / "metrics.json", mj.dump(2) + "\n");
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int hw = int(std::thread::hardware_concurrency());
  const int nthreads = std::max(
      1, std::min<int>(parallel > 0 ? parallel : std::max(1, hw),
                       int(jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  // Per-run report lines plus per-scenario and overall summaries.
  std::string csv =
      "scenario,mode,seeds,mean_mainline_delay_s,mean_ramp_delay_s,"
      "mean_overall_delay_s,mean_throughput_vph,total_emergency_brake_events,"
      "gap_within_tol_share\n";
  for (const auto& sc : scenarios) {
    nlohmann::ordered_json sj;
    sj["scenario"] = sc.name;
    sj["q_main_vph"] = sc.q_main_vph;
    sj["q_ramp_vph"] = sc.q_ramp_vph;
    const auto pit = plans.find(sc.name);
    sj["plan"] = pit == plans.end()
                     ? nlohmann::ordered_json(nullptr)
                     : io::plan_json(pit->second);
    sj["runs"] = nlohmann::ordered_json::array();
    for (const sim::sim_mode mode : sc.modes) {
      std::vector<double> d_main, d_ramp, d_all, thr;
      long emergencies = 0, gap_ok = 0, gap_total = 0;
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        const sim_job& j = jobs[i];
        if (j.sc != &sc || j.mode != mode) continue;
        const sim::sim_metrics& m = results[i].metrics;
        d_main.push_back(m.mainline.mean_delay_s);
        d_ramp.push_back(m.ramp.mean_delay_s);
        d_all.push_back(m.overall.mean_delay_s);
        thr.push_back(m.throughput_vph);
        emergencies += m.emergency_brake_events;
        if (m.cycles) {
          gap_ok += m.cycles->gap_within_tol;
          gap_total += m.cycles->uncongested;
        }
        std::printf(
            "%-6s %-5s seed %2llu: vehicles %5ld  delay main %7.2f s  "
            "ramp %7.2f s  overall %7.2f s  throughput %7.1f veh/h\n",
            sc.name.c_str(), to_string(mode),
            static_cast<unsigned long long>(j.seed), m.overall.count,
            m.mainline.mean_delay_s, m.ramp.mean_delay_s,
            m.overall.mean_delay_s, m.throughput_vph);
        nlohmann::ordered_json rj;
        rj["mode"] = to_string(mode);
        rj["seed"] = j.seed;
        rj["mainline_delay_s"] = m.mainline.mean_delay_s;
        rj["ramp_delay_s"] = m.ramp.mean_delay_s;
        rj["overall_delay_s"] = m.overall.mean_delay_s;
        rj["throughput_vph"] = m.throughput_vph;
        rj["trajectory_hash"] = io::hex64(results[i].traj_hash);
        sj["runs"].push_back(rj);
      }
      if (d_main.empty()) continue;
      nlohmann::ordered_json mj;
      mj["seeds"] = d_main.size();
      mj["mean_mainline_delay_s"] = mean_of(d_main);
      mj["mean_ramp_delay_s"] = mean_of(d_ramp);
      mj["mean_overall_delay_s"] = mean_of(d_all);
      mj["mean_throughput_vph"] = mean_of(thr);
      mj["total_emergency_brake_events"] = emergencies;
      if (mode == sim::sim_mode::comc) {
        mj["gap_within_tol_share"] =
            gap_total ? double(gap_ok) / double(gap_total) : 0.0;
      }
      sj[std::string("mean_") + to_string(mode)] = mj;
      char row[256];
      std::snprintf(row, sizeof row, "%s,%s,%zu,%.4f,%.4f,%.4f,%.2f,%ld,",
                    sc.name.c_str(), to_string(mode), d_main.size(),
                    mean_of(d_main), mean_of(d_ramp), mean_of(d_all),
                    mean_of(thr), emergencies);
      csv += row;
      if (mode == sim::sim_mode::comc && gap_total) {
        std::snprintf(row, sizeof row, "%.4f",
                      double(gap_ok) / double(gap_total));
        csv += row;
      }
      csv += "\n";
    }
    fs::create_directories(root / sc.name);
    write_file(root / sc.name / "summary.json", sj.dump(2) + "\n");
  }
  fs::create_directories(root);
  write_file(root / "summary.csv", csv);
  std::printf("summary written to %s\n", (root / "summary.csv").c_str());
  return kExitOk;
}

// --- boundary ---------------------------------------------------------—---

int cmd_boundary(std::vector<double> q_mains, const std::string& out_path) {
  if (q_mains.empty()) q_mains = {1200.0, 1400.0, 1600.0, 1800.0, 2000.0};
  const merge_inputs tmpl =
      io::default_scenario("boundary", 1600.0, 300.0).inputs;
  std::string csv = "q_main_vph,max_q_ramp_vph\n";
  for (const double q : q_mains) {
    const int cap = max_ramp_flow(q, tmpl);
    char row[64];
    std::snprintf(row, sizeof row, "%.0f,%d\n", q, cap);
    csv += row;
    std::fputs(row, stdout);
  }
  if (!out_path.empty()) write_file(out_path, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative on-ramp merging: plan optimizer and merge-area "
               "simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::vector<std::string> filter;
  std::vector<std::uint64_t> seeds;
  std::vector<double> q_mains;
  bool oracle = false;
  int parallel = 0;

  CLI::App* plan = app.add_subcommand(
      "plan", "Solve the coordination plan for each scenario");
  plan->add_option("--config", config_path, "Scenario file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  plan->add_option("--scenario", filter, "Only these scenario names")
      ->delimiter(',');
  plan->add_flag("--oracle", oracle,
                 "Also run the exhaustive reference search and compare");
  plan->add_option("--out", out_path, "Write plans as JSON to this file");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run the merge-area simulation for each scenario");
  simulate->add_option("--config", config_path, "Scenario file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--scenario", filter, "Only these scenario names")
      ->delimiter(',');
  simulate->add_option("--seeds", seeds, "Override the seed list")
      ->delimiter(',');
  simulate->add_option("--parallel", parallel,
                       "Worker threads (default: hardware)");
  simulate->add_option("--out", out_path, "Output directory")
      ->default_val("out");

  CLI::App* boundary = app.add_subcommand(
      "boundary", "Largest feasible ramp demand per mainline demand");
  boundary->add_option("--q-main", q_mains, "Mainline demands (veh/h)")
      ->delimiter(',');
  boundary->add_option("--out", out_path, "Write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (plan->parsed()) return cmd_plan(config_path, filter, oracle, out_path);
    if (simulate->parsed())
      return cmd_simulate(config_path, filter, seeds, parallel, out_path);
    return cmd_boundary(q_mains, out_path);
  } catch (const io::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const infeasible_scenario_error& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    print_margins(e.closest());
    return kExitInfeasible;
  } catch (const sim::sim_fault& e) {
    std::fprintf(stderr, "simulation fault: %s\n", e.what());
    return kExitSimFault;
  } catch (const model_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return is_infeasibility(e.code()) ? kExitInfeasible : kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitGeneric;
  }
}
