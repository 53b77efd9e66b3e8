#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetnet/bandwidth_allocator.hpp"
#include "hetnet/channel_model.hpp"
#include "hetnet/config.hpp"
#include "hetnet/ee_model.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/matrix.hpp"
#include "hetnet/power_allocator.hpp"
#include "hetnet/random.hpp"

namespace hetnet {

enum class SolverStatus { Converged, MaxIterations, Infeasible };

inline std::string_view to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIterations: return "max_iterations";
    case SolverStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

struct SolverResult {
  double beta = 0.0;
  PowerMatrix power;
  double total_ee = 0.0;        // bits/Hz/J
  double total_capacity = 0.0;  // bits/s/Hz
  Matrix per_user_rates;
  int iterations = 0;
  std::vector<double> ee_trace;
  SolverStatus status = SolverStatus::Infeasible;
  std::string reason;  // why the instance is infeasible, empty otherwise

  bool feasible() const { return status != SolverStatus::Infeasible; }
};

struct IterativeOptions {
  int max_outer = 50;     // L_max
  double rel_tol = 1e-4;  // on the total EE; 0 disables early stopping
};

/// Exhaustive search resolution: powers {0, a, ..., Pmax}, beta {b, ..., 1 - b}.
struct OracleGrid {
  double power_step = 0.0;
  double beta_step = 0.01;
  /// Upper bound on objective-term evaluations.
  double budget = 1e8;

  static OracleGrid defaults_for(const ScenarioConfig& cfg) { return {cfg.max_user_power / 100.0, 0.01}; }
};

namespace detail {

inline SolverResult evaluate(const ScenarioConfig& cfg, const ChannelRealization& ch, double beta,
                             PowerMatrix P) {
  SolverResult r;
  r.beta = beta;
  r.per_user_rates = rate_matrix(beta, P, ch, cfg);
  r.total_capacity = compensated_sum(r.per_user_rates.flat());
  r.total_ee = total_ee(beta, P, ch, cfg);
  r.power = std::move(P);
  return r;
}

inline SolverResult infeasible(std::string reason, double beta = 0.0, PowerMatrix P = {}) {
  SolverResult r;
  r.beta = beta;
  r.power = std::move(P);
  r.status = SolverStatus::Infeasible;
  r.reason = std::move(reason);
  return r;
}

inline PowerMatrix equal_power(const ScenarioConfig& cfg, double p) { return PowerMatrix(cfg.J(), cfg.K(), p); }

/// Per-user EE-optimal power at a broadcast beta; nullopt if some user has L > H.
inline std::optional<PowerMatrix> power_step(double beta, const ScenarioConfig& cfg, const ChannelRealization& ch,
                                             std::span<const double> gammas, const GabsSettings& settings,
                                             std::string* why = nullptr) {
  PowerMatrix P(cfg.J(), cfg.K());
  for (std::size_t j = 0; j < cfg.J(); ++j) {
    for (std::size_t k = 0; k < cfg.K(); ++k) {
      try {
        P(j, k) = allocate_power(beta, cfg, ch, j, k, gammas[j], settings);
      } catch (const InfeasibleUser& e) {
        if (why) *why = e.what();
        return std::nullopt;
      }
    }
  }
  return P;
}

inline bool all_users_feasible(double beta, const ScenarioConfig& cfg, const ChannelRealization& ch,
                               std::span<const double> gammas) {
  for (std::size_t j = 0; j < cfg.J(); ++j)
    for (std::size_t k = 0; k < cfg.K(); ++k)
      if (!power_bounds(beta, cfg, ch, j, k, gammas[j]).feasible) return false;
  return true;
}

/// Equal power at Pmax / 2, then the QoS gate and the smallest feasible beta.
inline std::optional<double> initial_beta(const ScenarioConfig& cfg, const ChannelRealization& ch,
                                          std::span<const double> gammas, std::string& why) {
  const PowerMatrix P0 = equal_power(cfg, cfg.max_user_power / 2.0);
  const QosCheck qos = qos_feasibility(P0, ch, cfg, gammas);
  if (!qos.feasible) {
    why = "QoS floor " + std::to_string(cfg.qos_rate) + " exceeds admissible rate " +
          std::to_string(qos.min_varphi) + " at equal power";
    return std::nullopt;
  }
  return beta_optimal(P0, ch, cfg, gammas).beta;
}

} // namespace detail

/// Alternates the bandwidth step (beta = max_j phi_j at the current powers)
/// and the per-user GABS power step until the total EE settles.
///
/// Each outer iteration ends with the certified allocation (phi_max(P), P):
/// the power step keeps every cell under its backhaul share, so tightening
/// beta to the binding cell keeps C1-C4 and can only raise EE. The best
/// allocation seen is returned and ee_trace holds the running best.
inline SolverResult iterative_solve(const ScenarioConfig& cfg, const ChannelRealization& ch,
                                    const GabsSettings& settings = {}, const IterativeOptions& opts = {}) {
  const auto gammas = backhaul_snrs(cfg, ch);
  std::string why;
  const auto beta0 = detail::initial_beta(cfg, ch, gammas, why);
  if (!beta0) return detail::infeasible(why);

  double beta = *beta0;
  std::optional<SolverResult> best;
  std::vector<double> trace;
  SolverStatus status = SolverStatus::MaxIterations;
  int iterations = 0;
  for (int l = 1; l <= opts.max_outer; ++l) {
    auto P = detail::power_step(beta, cfg, ch, gammas, settings, &why);
    if (!P) return detail::infeasible(why, beta);
    const double tightened = beta_optimal(*P, ch, cfg, gammas).beta;
    SolverResult cur = detail::evaluate(cfg, ch, tightened, std::move(*P));
    if (!best || cur.total_ee > best->total_ee) best = std::move(cur);
    trace.push_back(best->total_ee);
    iterations = l;
    if (l >= 2 && opts.rel_tol > 0.0 &&
        std::abs(trace[l - 1] - trace[l - 2]) <= opts.rel_tol * std::abs(trace[l - 1])) {
      status = SolverStatus::Converged;
      break;
    }
    beta = tightened;
  }
  if (!best) return detail::infeasible("max_outer must be >= 1");
  best->iterations = iterations;
  best->ee_trace = std::move(trace);
  best->status = status;
  return *best;
}

/// Powers for a broadcast beta, without revisiting beta.
inline SolverResult solve_at_beta(const ScenarioConfig& cfg, const ChannelRealization& ch, double beta,
                                  const GabsSettings& settings = {}) {
  const auto gammas = backhaul_snrs(cfg, ch);
  std::string why;
  auto P = detail::power_step(beta, cfg, ch, gammas, settings, &why);
  if (!P) return detail::infeasible(why, beta);
  SolverResult r = detail::evaluate(cfg, ch, beta, std::move(*P));
  r.iterations = 1;
  r.ee_trace = {r.total_ee};
  r.status = SolverStatus::Converged;
  return r;
}

/// Low-complexity variant: beta from the equal-power matrix, then one
/// power step.
inline SolverResult fixed_beta_solve(const ScenarioConfig& cfg, const ChannelRealization& ch,
                                     const GabsSettings& settings = {}) {
  const auto gammas = backhaul_snrs(cfg, ch);
  std::string why;
  const auto beta = detail::initial_beta(cfg, ch, gammas, why);
  if (!beta) return detail::infeasible(why);
  return solve_at_beta(cfg, ch, *beta, settings);
}

/// Baseline: every user at Pmax, beta = max_j phi_j at those powers.
inline SolverResult equal_power_baseline(const ScenarioConfig& cfg, const ChannelRealization& ch) {
  const auto gammas = backhaul_snrs(cfg, ch);
  PowerMatrix P = detail::equal_power(cfg, cfg.max_user_power);
  const QosCheck qos = qos_feasibility(P, ch, cfg, gammas);
  const double beta = beta_optimal(P, ch, cfg, gammas).beta;
  if (!qos.feasible) return detail::infeasible("QoS floor not reachable at equal power", beta, std::move(P));
  SolverResult r = detail::evaluate(cfg, ch, beta, std::move(P));
  r.iterations = 1;
  r.ee_trace = {r.total_ee};
  r.status = SolverStatus::Converged;
  return r;
}

inline constexpr int kRandomBetaDraws = 100;

/// Baseline: beta ~ U(0, 1), redrawn until every user has L <= H, followed by
/// the optimal power step. `forced_beta` bypasses the draw.
inline SolverResult random_beta_baseline(const ScenarioConfig& cfg, const ChannelRealization& ch, Rng& rng,
                                         const GabsSettings& settings = {},
                                         std::optional<double> forced_beta = std::nullopt) {
  if (forced_beta) return solve_at_beta(cfg, ch, *forced_beta, settings);
  const auto gammas = backhaul_snrs(cfg, ch);
  for (int draw = 0; draw < kRandomBetaDraws; ++draw) {
    const double beta = rng.uniform();
    if (detail::all_users_feasible(beta, cfg, ch, gammas)) return solve_at_beta(cfg, ch, beta, settings);
  }
  return detail::infeasible("no feasible beta in " + std::to_string(kRandomBetaDraws) + " random draws");
}

/// Number of objective-term evaluations exhaustive_oracle performs.
///
/// For a fixed beta the objective is a sum over cells and every constraint
/// involves one cell only, so the maximum over the full grid
/// {0, a, ..., Pmax}^{JK} equals the sum of per-cell maxima over
/// {0, a, ..., Pmax}^K. The count is therefore (#beta) * J * (#p)^K * K.
inline double oracle_cost(const ScenarioConfig& cfg, const OracleGrid& grid) {
  const double n_power = std::floor(cfg.max_user_power / grid.power_step * (1.0 + 1e-12)) + 1.0;
  const double n_beta = std::ceil(1.0 / grid.beta_step * (1.0 - 1e-12)) - 1.0;
  return n_beta * static_cast<double>(cfg.J()) * std::pow(n_power, static_cast<double>(cfg.K())) *
         static_cast<double>(cfg.K());
}

/// Exhaustive grid search of the joint problem.
///
/// Returns the feasible grid point with the largest total EE; ties keep the
/// lexicographically smallest point (beta first, then powers row by row).
/// Throws BudgetExceeded when oracle_cost exceeds grid.budget.
inline SolverResult exhaustive_oracle(const ScenarioConfig& cfg, const ChannelRealization& ch,
                                      const OracleGrid& grid) {
  if (!(grid.power_step > 0.0) || !(grid.beta_step > 0.0 && grid.beta_step < 1.0)) {
    throw ConfigError("oracle grid needs power_step > 0 and 0 < beta_step < 1");
  }
  const double cost = oracle_cost(cfg, grid);
  if (!(cost <= grid.budget)) {
    throw BudgetExceeded("oracle grid needs " + std::to_string(cost) + " evaluations, budget " +
                         std::to_string(grid.budget));
  }
  const std::size_t J = cfg.J();
  const std::size_t K = cfg.K();
  const auto gammas = backhaul_snrs(cfg, ch);
  const Matrix a = effective_gains(cfg, ch);

  const auto n_power = static_cast<std::size_t>(std::floor(cfg.max_user_power / grid.power_step * (1.0 + 1e-12))) + 1;
  const auto n_beta = static_cast<std::size_t>(std::ceil(1.0 / grid.beta_step * (1.0 - 1e-12))) - 1;
  std::vector<double> powers(n_power);
  for (std::size_t i = 0; i < n_power; ++i) powers[i] = std::min(static_cast<double>(i) * grid.power_step, cfg.max_user_power);

  // log2(1 + a p) and log2(1 + a p) / (Pc + p) per user and grid power.
  Grid<double> log_terms(J * K, n_power);
  Grid<double> ee_terms(J * K, n_power);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < n_power; ++i) {
        const double l = powers[i] == 0.0 ? 0.0 : log2_1p(a(j, k) * powers[i]);
        log_terms(j * K + k, i) = l;
        ee_terms(j * K + k, i) = l / (cfg.circuit_power + powers[i]);
      }
  std::vector<double> backhaul_logs(J);
  for (std::size_t j = 0; j < J; ++j) backhaul_logs[j] = backhaul_log_term(cfg, gammas[j]);

  double best_total = -1.0;
  double best_beta = 0.0;
  std::vector<std::size_t> best_idx;

  std::vector<std::size_t> idx(K), cell_best(K), all_idx(J * K);
  for (std::size_t m = 1; m <= n_beta; ++m) {
    const double beta = static_cast<double>(m) * grid.beta_step;
    const double w = access_weight(beta, K);
    double total = 0.0;
    bool feasible = true;
    for (std::size_t j = 0; j < J && feasible; ++j) {
      const double capacity = beta * backhaul_logs[j];
      double cell_max = -1.0;
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        double rate_sum = 0.0;
        double ee_sum = 0.0;
        bool ok = true;
        for (std::size_t k = 0; k < K; ++k) {
          const double r = w * log_terms(j * K + k, idx[k]);
          if (r < cfg.qos_rate) {
            ok = false;
            break;
          }
          rate_sum += r;
          ee_sum += ee_terms(j * K + k, idx[k]);
        }
        if (ok && rate_sum <= capacity && w * ee_sum > cell_max) {
          cell_max = w * ee_sum;
          cell_best = idx;
        }
        // odometer, last user fastest
        std::size_t pos = K;
        while (pos > 0 && ++idx[pos - 1] == n_power) idx[--pos] = 0;
        if (pos == 0) break;
      }
      if (cell_max < 0.0) {
        feasible = false;
      } else {
        total += cell_max;
        std::copy(cell_best.begin(), cell_best.end(), all_idx.begin() + static_cast<std::ptrdiff_t>(j * K));
      }
    }
    if (feasible && total > best_total) {
      best_total = total;
      best_beta = beta;
      best_idx = all_idx;
    }
  }
  if (best_idx.empty()) return detail::infeasible("no grid point satisfies the constraints");

  PowerMatrix P(J, K);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < K; ++k) P(j, k) = powers[best_idx[j * K + k]];
  SolverResult r = detail::evaluate(cfg, ch, best_beta, std::move(P));
  r.iterations = 1;
  r.ee_trace = {r.total_ee};
  r.status = SolverStatus::Converged;
  return r;
}

} // namespace hetnet
