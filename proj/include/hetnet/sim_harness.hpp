#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hetnet/channel_model.hpp"
#include "hetnet/config.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/random.hpp"
#include "hetnet/solvers.hpp"

namespace hetnet {

enum class SweepVariable { UsersPerCell, NumSmallCells, MaxUserPower, QosRate };
enum class Algorithm { Iterative, FixedBeta, EqualPower, RandomBeta, Oracle };

inline std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::UsersPerCell: return "users_per_cell";
    case SweepVariable::NumSmallCells: return "num_small_cells";
    case SweepVariable::MaxUserPower: return "max_user_power";
    case SweepVariable::QosRate: return "qos_rate";
  }
  return "unknown";
}

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Iterative: return "iterative";
    case Algorithm::FixedBeta: return "fixed_beta";
    case Algorithm::EqualPower: return "equal_power";
    case Algorithm::RandomBeta: return "random_beta";
    case Algorithm::Oracle: return "oracle";
  }
  return "unknown";
}

inline SweepVariable parse_sweep_variable(std::string_view s) {
  for (auto v : {SweepVariable::UsersPerCell, SweepVariable::NumSmallCells, SweepVariable::MaxUserPower,
                 SweepVariable::QosRate})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown sweep variable: " + std::string(s));
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::Iterative, Algorithm::FixedBeta, Algorithm::EqualPower, Algorithm::RandomBeta,
                 Algorithm::Oracle})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown algorithm: " + std::string(s));
}

/// Largest J * K for which the oracle may be requested.
inline constexpr int kOracleMaxUsers = 8;

struct ExperimentSpec {
  ScenarioConfig base;
  SweepVariable sweep_variable = SweepVariable::UsersPerCell;
  /// max_user_power values are in dBm, like the config file.
  std::vector<double> sweep_values;
  std::vector<Algorithm> algorithms;
  int trials = 100;
  std::uint64_t base_seed = 1;
  /// Reuse the same trial seeds at every sweep value instead of mixing the
  /// sweep index into the seed.
  bool common_random_numbers = false;
  GabsSettings gabs;
  IterativeOptions iterative;
  int oracle_power_divisions = 100;  // a = Pmax / divisions
  double oracle_beta_step = 0.01;    // b
  unsigned workers = 0;              // 0 = hardware concurrency
};

/// Scenario at one sweep point.
inline ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepVariable var, double value) {
  ScenarioConfig cfg = base;
  auto as_count = [&](double v) {
    if (v != std::floor(v) || v < 1.0) throw ConfigError("sweep value must be a positive integer");
    return static_cast<int>(v);
  };
  switch (var) {
    case SweepVariable::UsersPerCell: cfg.users_per_cell = as_count(value); break;
    case SweepVariable::NumSmallCells: cfg.num_small_cells = as_count(value); break;
    case SweepVariable::MaxUserPower: cfg.max_user_power = dbm_to_watts(value); break;
    case SweepVariable::QosRate: cfg.qos_rate = value; break;
  }
  cfg.validate();
  return cfg;
}

inline void validate(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");
  if (spec.sweep_values.empty()) throw ConfigError("sweep_values must be nonempty");
  for (std::size_t i = 1; i < spec.sweep_values.size(); ++i)
    if (!(spec.sweep_values[i] > spec.sweep_values[i - 1]))
      throw ConfigError("sweep_values must be strictly increasing");
  if (spec.algorithms.empty()) throw ConfigError("algorithms must be nonempty");
  for (std::size_t i = 0; i < spec.algorithms.size(); ++i)
    for (std::size_t k = i + 1; k < spec.algorithms.size(); ++k)
      if (spec.algorithms[i] == spec.algorithms[k]) throw ConfigError("duplicate algorithm");
  spec.gabs.validate();
  if (spec.iterative.max_outer < 1 || !(spec.iterative.rel_tol >= 0.0))
    throw ConfigError("iterative options need max_outer >= 1 and rel_tol >= 0");
  if (spec.oracle_power_divisions < 1 || !(spec.oracle_beta_step > 0.0 && spec.oracle_beta_step < 1.0))
    throw ConfigError("oracle grid needs divisions >= 1 and 0 < beta_step < 1");
  const bool oracle = std::find(spec.algorithms.begin(), spec.algorithms.end(), Algorithm::Oracle) !=
                      spec.algorithms.end();
  for (double v : spec.sweep_values) {
    const ScenarioConfig cfg = apply_sweep(spec.base, spec.sweep_variable, v);
    if (oracle && cfg.num_small_cells * cfg.users_per_cell > kOracleMaxUsers)
      throw ConfigError("oracle requires num_small_cells * users_per_cell <= 8");
  }
}

/// One algorithm on one trial.
struct TrialOutcome {
  bool feasible = false;
  double total_ee = 0.0;
  double total_capacity = 0.0;
  int iterations = 0;
};

/// outcomes[sweep][trial][algorithm], algorithm in listed order.
struct ExperimentRecords {
  std::vector<std::vector<std::vector<TrialOutcome>>> outcomes;
};

struct AggregateRow {
  std::string sweep_variable;
  double sweep_value = 0.0;
  std::string algorithm;
  double mean_total_ee = 0.0;
  double mean_total_capacity = 0.0;
  double feasibility_rate = 0.0;
  double mean_iterations = 0.0;
  int trials_used = 0;
};

inline std::uint64_t experiment_trial_seed(const ExperimentSpec& spec, std::size_t sweep_index, int trial) {
  return trial_seed(spec.base_seed, spec.common_random_numbers ? 0 : sweep_index,
                    static_cast<std::uint64_t>(trial));
}

/// Runs every requested algorithm on one seeded realization.
inline std::vector<TrialOutcome> run_trial(const ExperimentSpec& spec, const ScenarioConfig& cfg,
                                           std::uint64_t seed) {
  const TrialInstance inst = make_instance(cfg, seed);
  std::vector<TrialOutcome> out;
  out.reserve(spec.algorithms.size());
  for (Algorithm algo : spec.algorithms) {
    SolverResult r;
    switch (algo) {
      case Algorithm::Iterative: r = iterative_solve(cfg, inst.channels, spec.gabs, spec.iterative); break;
      case Algorithm::FixedBeta: r = fixed_beta_solve(cfg, inst.channels, spec.gabs); break;
      case Algorithm::EqualPower: r = equal_power_baseline(cfg, inst.channels); break;
      case Algorithm::RandomBeta: {
        Rng rng(splitmix64(seed ^ kBaselineStreamTag));
        r = random_beta_baseline(cfg, inst.channels, rng, spec.gabs);
        break;
      }
      case Algorithm::Oracle: {
        OracleGrid grid{cfg.max_user_power / spec.oracle_power_divisions, spec.oracle_beta_step};
        r = exhaustive_oracle(cfg, inst.channels, grid);
        break;
      }
    }
    out.push_back({r.feasible(), r.total_ee, r.total_capacity, r.iterations});
  }
  return out;
}

/// Executes all (sweep value, trial) work items on a bounded worker pool.
/// Results land in fixed slots, so the output does not depend on scheduling.
inline ExperimentRecords run_trials(const ExperimentSpec& spec) {
  validate(spec);
  const std::size_t n_sweep = spec.sweep_values.size();
  const auto n_trials = static_cast<std::size_t>(spec.trials);
  std::vector<ScenarioConfig> configs;
  for (double v : spec.sweep_values) configs.push_back(apply_sweep(spec.base, spec.sweep_variable, v));

  ExperimentRecords rec;
  rec.outcomes.assign(n_sweep, std::vector<std::vector<TrialOutcome>>(n_trials));

  const std::size_t total = n_sweep * n_trials;
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::size_t err_index = total;
  std::exception_ptr err;

  auto worker = [&] {
    for (std::size_t item = next++; item < total; item = next++) {
      const std::size_t i = item / n_trials;
      const std::size_t t = item % n_trials;
      try {
        rec.outcomes[i][t] = run_trial(spec, configs[i], experiment_trial_seed(spec, i, static_cast<int>(t)));
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (item < err_index) {
          err_index = item;
          err = std::current_exception();
        }
      }
    }
  };

  unsigned n_workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, total));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);
  return rec;
}

/// Means over feasible trials only, accumulated in trial order.
inline std::vector<AggregateRow> aggregate(const ExperimentSpec& spec, const ExperimentRecords& rec) {
  std::vector<AggregateRow> rows;
  const double nan = std::nan("");
  for (std::size_t i = 0; i < rec.outcomes.size(); ++i) {
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
      double ee = 0.0, cap = 0.0, iters = 0.0;
      int used = 0;
      for (const auto& trial : rec.outcomes[i]) {
        const TrialOutcome& o = trial[a];
        if (!o.feasible) continue;
        ee += o.total_ee;
        cap += o.total_capacity;
        iters += o.iterations;
        ++used;
      }
      AggregateRow row;
      row.sweep_variable = std::string(to_string(spec.sweep_variable));
      row.sweep_value = spec.sweep_values[i];
      row.algorithm = std::string(to_string(spec.algorithms[a]));
      row.mean_total_ee = used ? ee / used : nan;
      row.mean_total_capacity = used ? cap / used : nan;
      row.mean_iterations = used ? iters / used : nan;
      row.feasibility_rate = static_cast<double>(used) / static_cast<double>(rec.outcomes[i].size());
      row.trials_used = used;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::vector<AggregateRow> run_experiment(const ExperimentSpec& spec) {
  return aggregate(spec, run_trials(spec));
}

// ---------------------------------------------------------------------------
// Output

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError("unknown output format: " + std::string(s));
}

/// 10 significant digits; "nan" for undefined means.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr const char* kCsvHeader =
    "sweep_variable,sweep_value,algorithm,mean_total_ee,mean_total_capacity,feasibility_rate,"
    "mean_iterations,trials_used";

inline std::string rows_to_csv(const std::vector<AggregateRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.sweep_variable + "," + format_number(r.sweep_value) + "," + r.algorithm + "," +
           format_number(r.mean_total_ee) + "," + format_number(r.mean_total_capacity) + "," +
           format_number(r.feasibility_rate) + "," + format_number(r.mean_iterations) + "," +
           std::to_string(r.trials_used) + "\n";
  }
  return out;
}

/// JSON number rounded to 10 significant digits (null for NaN).
inline nlohmann::json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return std::stod(format_number(v));
}

inline nlohmann::json rows_to_json_value(const std::vector<AggregateRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"sweep_variable", r.sweep_variable},
                   {"sweep_value", json_number(r.sweep_value)},
                   {"algorithm", r.algorithm},
                   {"mean_total_ee", json_number(r.mean_total_ee)},
                   {"mean_total_capacity", json_number(r.mean_total_capacity)},
                   {"feasibility_rate", json_number(r.feasibility_rate)},
                   {"mean_iterations", json_number(r.mean_iterations)},
                   {"trials_used", r.trials_used}});
  }
  return arr;
}

inline std::string rows_to_json(const std::vector<AggregateRow>& rows) {
  return rows_to_json_value(rows).dump(2) + "\n";
}

inline std::string render_rows(const std::vector<AggregateRow>& rows, OutputFormat format) {
  return format == OutputFormat::Csv ? rows_to_csv(rows) : rows_to_json(rows);
}

/// Writes rows to `path`. Empty input is a usage error and creates no file.
inline void emit_results(const std::vector<AggregateRow>& rows, OutputFormat format,
                         const std::filesystem::path& path) {
  if (rows.empty()) throw ConfigError("emit_results: no rows to write");
  const std::string text = render_rows(rows, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open output file: " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error("failed writing output file: " + path.string());
}

// ---------------------------------------------------------------------------
// Experiment files

inline ExperimentSpec experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw ConfigError("experiment file must be a JSON object");
  ExperimentSpec spec;
  try {
    if (auto it = j.find("base"); it != j.end()) {
      if (it->is_string()) {
        std::filesystem::path p = it->get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        spec.base = load_scenario(p);
      } else {
        spec.base = scenario_from_json(*it);
      }
    }
    spec.sweep_variable = parse_sweep_variable(j.at("sweep_variable").get<std::string>());
    spec.sweep_values = j.at("sweep_values").get<std::vector<double>>();
    for (const auto& a : j.at("algorithms")) spec.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    detail::read_opt(j, "trials", spec.trials);
    detail::read_opt(j, "base_seed", spec.base_seed);
    detail::read_opt(j, "common_random_numbers", spec.common_random_numbers);
    detail::read_opt(j, "max_outer", spec.iterative.max_outer);
    detail::read_opt(j, "rel_tol", spec.iterative.rel_tol);
    detail::read_opt(j, "oracle_power_divisions", spec.oracle_power_divisions);
    detail::read_opt(j, "oracle_beta_step", spec.oracle_beta_step);
    detail::read_opt(j, "workers", spec.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment file: ") + e.what());
  }
  validate(spec);
  return spec;
}

inline ExperimentSpec load_experiment(const std::filesystem::path& path) {
  return experiment_from_json(read_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------

/// Per-iteration total EE of the iterative solver on one seeded trial.
inline std::vector<double> convergence_trace(const ScenarioConfig& cfg, std::uint64_t seed,
                                             const IterativeOptions& opts = {}, const GabsSettings& gabs = {}) {
  const TrialInstance inst = make_instance(cfg, seed);
  const SolverResult r = iterative_solve(cfg, inst.channels, gabs, opts);
  if (!r.feasible()) throw InfeasibleInstance(r.reason);
  return r.ee_trace;
}

} // namespace hetnet
