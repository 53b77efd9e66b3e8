#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hetnet/channel_model.hpp"
#include "hetnet/config.hpp"
#include "hetnet/ee_model.hpp"
#include "hetnet/matrix.hpp"

namespace hetnet {

struct BetaSolution {
  double beta = 0.0;
  std::size_t binding_cell = 0;
  std::vector<double> phi;  // per-cell lower bounds on beta
  bool feasible = false;
};

struct QosCheck {
  double min_varphi = 0.0;  // smallest achievable per-user rate at the chosen beta
  bool feasible = false;
};

/// log2(1 + SINR) of every user of cell j at powers `row`.
inline std::vector<double> access_log_terms(std::span<const double> row, const ChannelRealization& ch,
                                            const ScenarioConfig& cfg, std::size_t j) {
  std::vector<double> out(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) {
    out[k] = row[k] == 0.0 ? 0.0 : log2_1p(access_sinr(cfg, ch, row[k], j, k));
  }
  return out;
}

/// phi_j = S_j / (K * C_j^log + S_j), S_j = sum_k log2(1 + SINR_jk): the
/// smallest beta at which cell j's backhaul carries its access throughput.
inline double phi_from_terms(double access_sum, double backhaul_log, std::size_t K) {
  const double denom = static_cast<double>(K) * backhaul_log + access_sum;
  return denom > 0.0 ? access_sum / denom : 0.0;
}

inline double phi_j(std::span<const double> row, const ChannelRealization& ch, const ScenarioConfig& cfg,
                    std::size_t j, double gamma_j) {
  const auto terms = access_log_terms(row, ch, cfg, j);
  return phi_from_terms(compensated_sum(terms), backhaul_log_term(cfg, gamma_j), cfg.K());
}

/// Smallest unified beta meeting every backhaul constraint: max_j phi_j.
/// Ties go to the lowest cell index.
inline BetaSolution beta_optimal(const PowerMatrix& P, const ChannelRealization& ch,
                                 const ScenarioConfig& cfg, std::span<const double> gammas) {
  BetaSolution sol;
  sol.phi.resize(P.rows());
  for (std::size_t j = 0; j < P.rows(); ++j) {
    sol.phi[j] = phi_j(P.row(j), ch, cfg, j, gammas[j]);
    if (sol.phi[j] > sol.phi[sol.binding_cell]) sol.binding_cell = j;
  }
  sol.beta = sol.phi.empty() ? 0.0 : sol.phi[sol.binding_cell];
  sol.feasible = sol.beta < 1.0;
  return sol;
}

/// QoS admissibility of P at the unified beta = max_j phi_j.
///
/// varphi_jk is the rate user (j, k) gets at that beta,
///   varphi_jk = (1 - beta) / K * log2(1 + SINR_jk)
///             = C_b * l_jk / (K * C_b + S_b)          (b = binding cell),
/// and the instance is admissible iff Rt <= min_jk varphi_jk.
inline QosCheck qos_feasibility(const PowerMatrix& P, const ChannelRealization& ch, const ScenarioConfig& cfg,
                                std::span<const double> gammas) {
  const BetaSolution sol = beta_optimal(P, ch, cfg, gammas);
  const std::size_t b = sol.binding_cell;
  const double backhaul_log = backhaul_log_term(cfg, gammas[b]);
  const double binding_sum = compensated_sum(access_log_terms(P.row(b), ch, cfg, b));
  const double denom = static_cast<double>(cfg.K()) * backhaul_log + binding_sum;

  QosCheck out;
  out.min_varphi = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < P.rows(); ++j) {
    for (double l : access_log_terms(P.row(j), ch, cfg, j)) {
      out.min_varphi = std::min(out.min_varphi, backhaul_log * l / denom);
    }
  }
  out.feasible = sol.feasible && cfg.qos_rate <= out.min_varphi;
  return out;
}

} // namespace hetnet
