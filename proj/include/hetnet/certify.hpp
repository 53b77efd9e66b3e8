#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hetnet/channel_model.hpp"
#include "hetnet/config.hpp"
#include "hetnet/matrix.hpp"

namespace hetnet {

/// Outcome of checking an allocation against the joint problem's
/// constraints: C1 power box, C2 backhaul capacity, C3 QoS floor, C4 beta
/// range.
struct ConstraintReport {
  bool c1_power = true;
  bool c2_backhaul = true;
  bool c3_qos = true;
  bool c4_beta = true;
  /// min_j |C_j - R_j| / max(1, C_j); zero when some cell's backhaul is tight.
  double binding_gap = std::numeric_limits<double>::infinity();
  std::size_t binding_cell = 0;
  std::string first_violation;

  bool ok() const { return c1_power && c2_backhaul && c3_qos && c4_beta; }
};

/// Re-derives every rate and capacity straight from the channel gains and
/// checks the constraints with slack tol * max(1, |reference|). Deliberately
/// shares no code with the rate / capacity helpers used by the solvers.
inline ConstraintReport certify_allocation(const ScenarioConfig& cfg, const ChannelRealization& ch,
                                           double beta, const PowerMatrix& P, double tol = 1e-9) {
  ConstraintReport rep;
  auto fail = [&rep](bool& flag, const std::string& msg) {
    if (flag && rep.first_violation.empty()) rep.first_violation = msg;
    flag = false;
  };
  auto slack = [tol](double ref) { return tol * std::max(1.0, std::abs(ref)); };

  if (!(beta >= 0.0 && beta <= 1.0)) fail(rep.c4_beta, "C4: beta outside [0, 1]");

  const double K = static_cast<double>(P.cols());
  const double zf_gain = (cfg.antenna_array - cfg.beamforming_group + 1.0) / cfg.beamforming_group;
  for (std::size_t j = 0; j < P.rows(); ++j) {
    const double snr = cfg.per_antenna_power * ch.G_backhaul[j] / cfg.noise_power;
    const double capacity = beta * std::log2(1.0 + zf_gain * snr);
    double throughput = 0.0;
    for (std::size_t k = 0; k < P.cols(); ++k) {
      const double p = P(j, k);
      const std::string who = "(" + std::to_string(j) + "," + std::to_string(k) + ")";
      if (!std::isfinite(p) || p < -tol || p > cfg.max_user_power + slack(cfg.max_user_power)) {
        fail(rep.c1_power, "C1: power out of [0, Pmax] at " + who);
      }
      const double sinr = p * ch.g(j, k) / (cfg.noise_power + cfg.per_antenna_power * ch.G_user(j, k));
      const double rate = (1.0 - beta) / K * std::log2(1.0 + sinr);
      if (rate < cfg.qos_rate - slack(cfg.qos_rate)) fail(rep.c3_qos, "C3: rate below Rt at " + who);
      throughput += rate;
    }
    if (throughput > capacity + slack(capacity)) {
      fail(rep.c2_backhaul, "C2: throughput exceeds backhaul capacity in cell " + std::to_string(j));
    }
    const double gap = std::abs(capacity - throughput) / std::max(1.0, capacity);
    if (gap < rep.binding_gap) {
      rep.binding_gap = gap;
      rep.binding_cell = j;
    }
  }
  return rep;
}

} // namespace hetnet
