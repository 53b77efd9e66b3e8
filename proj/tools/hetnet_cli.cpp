// Command-line front end for the allocation library and experiment harness.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetnet/sim_harness.hpp"

namespace {

using namespace hetnet;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kRuntime = 1, kConfig = 2, kInfeasible = 3, kBudget = 4 };

/// Writes to --out, or stdout when no path was given.
void write_text(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open output file: " + out);
  f << text;
  if (!f.flush()) throw Error("failed writing output file: " + out);
}

ScenarioConfig scenario_or_default(const std::string& path) {
  return path.empty() ? ScenarioConfig{} : load_scenario(path);
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (double v : m.row(r)) row.push_back(json_number(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

json result_json(const SolverResult& r, std::string_view algo, std::uint64_t seed) {
  json trace = json::array();
  for (double v : r.ee_trace) trace.push_back(json_number(v));
  json j = {{"algorithm", algo},
            {"seed", seed},
            {"status", to_string(r.status)},
            {"beta", json_number(r.beta)},
            {"total_ee", json_number(r.total_ee)},
            {"total_capacity", json_number(r.total_capacity)},
            {"iterations", r.iterations},
            {"ee_trace", trace},
            {"power", matrix_json(r.power)},
            {"per_user_rates", matrix_json(r.per_user_rates)}};
  if (!r.feasible()) j["reason"] = r.reason;
  return j;
}

SolverResult run_algorithm(Algorithm algo, const ScenarioConfig& cfg, std::uint64_t seed,
                           const IterativeOptions& iter, const OracleGrid& grid) {
  const TrialInstance inst = make_instance(cfg, seed);
  switch (algo) {
    case Algorithm::Iterative: return iterative_solve(cfg, inst.channels, {}, iter);
    case Algorithm::FixedBeta: return fixed_beta_solve(cfg, inst.channels);
    case Algorithm::EqualPower: return equal_power_baseline(cfg, inst.channels);
    case Algorithm::RandomBeta: {
      Rng rng(splitmix64(seed ^ kBaselineStreamTag));
      return random_beta_baseline(cfg, inst.channels, rng);
    }
    case Algorithm::Oracle: return exhaustive_oracle(cfg, inst.channels, grid);
  }
  throw ConfigError("unknown algorithm");
}

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& names) {
  std::vector<Algorithm> out;
  for (const auto& n : names) out.push_back(parse_algorithm(n));
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint bandwidth and power allocation for small cells with wireless backhaul"};
  app.require_subcommand(1);

  std::string config, out, format = "csv";
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<std::string> algos;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Scenario or experiment JSON file");
    sub->add_option("--seed", seed, "Trial seed (solve/oracle/trace) or base seed (simulate/sweep)");
    sub->add_option("--out", out, "Output file (default: stdout)");
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one seeded instance and print the result as JSON");
  add_common(solve);
  std::string solve_algo = "iterative";
  solve->add_option("--algo", solve_algo, "iterative | fixed_beta | equal_power | random_beta | oracle");
  int max_outer = IterativeOptions{}.max_outer;
  double rel_tol = IterativeOptions{}.rel_tol;
  solve->add_option("--max-outer", max_outer, "Outer iteration cap");
  solve->add_option("--rel-tol", rel_tol, "Relative EE change for convergence");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run an experiment file");
  add_common(simulate);
  add_format(simulate);
  simulate->add_option("--trials", trials, "Override the trial count");
  simulate->add_option("--algo", algos, "Override the algorithm list")->delimiter(',');

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Sweep one scenario parameter given inline");
  add_common(sweep);
  add_format(sweep);
  std::string sweep_var;
  std::vector<double> sweep_values;
  bool crn = false;
  sweep->add_option("--var", sweep_var, "users_per_cell | num_small_cells | max_user_power | qos_rate")
      ->required();
  sweep->add_option("--values", sweep_values, "Strictly increasing sweep values (max_user_power in dBm)")
      ->delimiter(',')
      ->required();
  sweep->add_option("--trials", trials, "Trials per sweep value");
  sweep->add_option("--algo", algos, "Algorithms")->delimiter(',');
  sweep->add_flag("--crn", crn, "Reuse trial seeds across sweep values");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exhaustive grid search on one small instance");
  add_common(oracle);
  int divisions = 100;
  double beta_step = 0.01;
  oracle->add_option("--power-divisions", divisions, "Power step is Pmax / divisions");
  oracle->add_option("--beta-step", beta_step, "Bandwidth factor step");

  // trace
  auto* trace = app.add_subcommand("trace", "Per-iteration EE of the iterative solver on one instance");
  add_common(trace);
  add_format(trace);
  trace->add_option("--max-outer", max_outer, "Outer iteration cap");
  trace->add_option("--rel-tol", rel_tol, "Relative EE change for convergence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*solve || *oracle) {
      const ScenarioConfig cfg = scenario_or_default(config);
      const std::uint64_t s = solve->count("--seed") || oracle->count("--seed") ? seed : cfg.rng_seed;
      const Algorithm algo = *oracle ? Algorithm::Oracle : parse_algorithm(solve_algo);
      if (divisions < 1) throw ConfigError("--power-divisions must be >= 1");
      const OracleGrid grid{cfg.max_user_power / divisions, beta_step};
      if (algo == Algorithm::Oracle && cfg.num_small_cells * cfg.users_per_cell > kOracleMaxUsers)
        throw ConfigError("oracle requires num_small_cells * users_per_cell <= 8");
      const IterativeOptions iter{max_outer, rel_tol};
      if (iter.max_outer < 1 || !(iter.rel_tol >= 0.0)) throw ConfigError("need --max-outer >= 1 and --rel-tol >= 0");
      const SolverResult r = run_algorithm(algo, cfg, s, iter, grid);
      write_text(result_json(r, to_string(algo), s).dump(2) + "\n", out);
      return r.feasible() ? kOk : kInfeasible;
    }

    if (*simulate) {
      if (config.empty()) throw ConfigError("simulate requires --config <experiment.json>");
      ExperimentSpec spec = load_experiment(config);
      if (simulate->count("--seed")) spec.base_seed = seed;
      if (simulate->count("--trials")) spec.trials = trials;
      if (!algos.empty()) spec.algorithms = parse_algorithms(algos);
      write_text(render_rows(run_experiment(spec), parse_format(format)), out);
      return kOk;
    }

    if (*sweep) {
      ExperimentSpec spec;
      spec.base = scenario_or_default(config);
      spec.sweep_variable = parse_sweep_variable(sweep_var);
      spec.sweep_values = sweep_values;
      spec.algorithms = algos.empty() ? std::vector<Algorithm>{Algorithm::Iterative, Algorithm::FixedBeta,
                                                               Algorithm::EqualPower, Algorithm::RandomBeta}
                                      : parse_algorithms(algos);
      if (sweep->count("--trials")) spec.trials = trials;
      spec.base_seed = sweep->count("--seed") ? seed : spec.base.rng_seed;
      spec.common_random_numbers = crn;
      write_text(render_rows(run_experiment(spec), parse_format(format)), out);
      return kOk;
    }

    if (*trace) {
      const ScenarioConfig cfg = scenario_or_default(config);
      const std::uint64_t s = trace->count("--seed") ? seed : cfg.rng_seed;
      const IterativeOptions iter{max_outer, rel_tol};
      if (iter.max_outer < 1 || !(iter.rel_tol >= 0.0)) throw ConfigError("need --max-outer >= 1 and --rel-tol >= 0");
      const std::vector<double> ee = convergence_trace(cfg, s, iter);
      std::string text;
      if (parse_format(format) == OutputFormat::Csv) {
        text = "iteration,total_ee\n";
        for (std::size_t i = 0; i < ee.size(); ++i) text += std::to_string(i + 1) + "," + format_number(ee[i]) + "\n";
      } else {
        json arr = json::array();
        for (std::size_t i = 0; i < ee.size(); ++i)
          arr.push_back({{"iteration", i + 1}, {"total_ee", json_number(ee[i])}});
        text = arr.dump(2) + "\n";
      }
      write_text(text, out);
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const PlacementFailure& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kRuntime;
}
