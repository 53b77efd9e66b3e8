#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "hetnet/channel_model.hpp"
#include "hetnet/config.hpp"
#include "hetnet/ee_model.hpp"
#include "hetnet/errors.hpp"

namespace hetnet {

/// Feasible power interval [L, H] of one user at a given beta.
struct PowerBounds {
  double L = 0.0;
  double H = 0.0;
  bool feasible = false;
};

struct GabsSettings {
  double expansion_factor = 2.0;  // c > 1
  double tolerance = 1e-8;        // final bracket width / max(1, p_low)
  int max_expansions = 200;
  int max_bisections = 200;

  void validate() const {
    if (!(expansion_factor > 1.0)) throw ConfigError("GABS expansion_factor must exceed 1");
    if (!(tolerance > 0.0)) throw ConfigError("GABS tolerance must be positive");
    if (max_expansions < 1 || max_bisections < 1) throw ConfigError("GABS step limits must be >= 1");
  }
};

/// Bounds from the QoS floor (L) and from the per-user share of backhaul
/// capacity C_j / K capped at Pmax (H).
inline PowerBounds power_bounds(double beta, double noise_over_gain, std::size_t K, double qos_rate,
                                double backhaul_log, double max_power) {
  PowerBounds b;
  const double floor_exp = static_cast<double>(K) * qos_rate / (1.0 - beta);
  b.L = floor_exp > kMaxRateExponent ? HUGE_VAL : noise_over_gain * exp2_m1(floor_exp);

  const double cap_exp = beta / (1.0 - beta) * backhaul_log;
  const double backhaul_cap = cap_exp > kMaxRateExponent ? HUGE_VAL : noise_over_gain * exp2_m1(cap_exp);
  b.H = std::min(backhaul_cap, max_power);
  b.feasible = b.L <= b.H;
  return b;
}

inline PowerBounds power_bounds(double beta, const ScenarioConfig& cfg, const ChannelRealization& ch,
                                std::size_t j, std::size_t k, double gamma_j) {
  const double noise_over_gain = (cfg.noise_power + ch.I(j, k)) / ch.g(j, k);
  return power_bounds(beta, noise_over_gain, cfg.K(), cfg.qos_rate, backhaul_log_term(cfg, gamma_j),
                      cfg.max_user_power);
}

/// Final GABS bracket: f(low) >= 0 >= f(high).
struct GabsBracket {
  double low = 0.0;
  double high = 0.0;
  double midpoint() const { return 0.5 * (low + high); }
};

/// Gradient assisted binary search for the stationary point of
/// U(p) = w log2(1 + a p) / (Pc + p).
///
/// Starting at init_p the gradient sign picks the direction; the bracket is
/// grown (or shrunk) geometrically by `expansion_factor` until f changes sign,
/// then bisected until its width is at most tolerance * max(1, low).
inline GabsBracket gabs_bracket(double eff_gain, double weight, double circuit_power, double init_p,
                                const GabsSettings& settings = {}) {
  settings.validate();
  if (!(eff_gain > 0.0) || !std::isfinite(eff_gain) || !(weight > 0.0) || !(circuit_power > 0.0)) {
    throw NonConvergence("GABS needs positive finite a, w and Pc");
  }
  if (!(init_p > 0.0) || !std::isfinite(init_p)) throw NonConvergence("GABS needs init_p > 0");

  auto f = [&](double p) { return ee_gradient_f(p, eff_gain, weight, circuit_power); };
  const double c = settings.expansion_factor;

  double low = init_p;
  double high = init_p;
  int steps = 0;
  if (f(low) < 0.0) {
    do {
      if (++steps > settings.max_expansions) throw NonConvergence("GABS: no positive gradient found below init_p");
      high = low;
      low /= c;
    } while (f(low) < 0.0);
  } else {
    high = low * c;
    while (f(high) > 0.0) {
      if (++steps > settings.max_expansions) throw NonConvergence("GABS: no negative gradient found above init_p");
      low = high;
      high *= c;
    }
  }

  for (int it = 0; high - low > settings.tolerance * std::max(1.0, low); ++it) {
    if (it >= settings.max_bisections) throw NonConvergence("GABS: bisection limit reached");
    const double mid = 0.5 * (low + high);
    if (f(mid) > 0.0)
      low = mid;
    else
      high = mid;
  }
  return {low, high};
}

/// Unconstrained EE-optimal power (midpoint of the final GABS bracket).
inline double gabs_search(double eff_gain, double weight, double circuit_power, double init_p,
                          const GabsSettings& settings = {}) {
  return gabs_bracket(eff_gain, weight, circuit_power, init_p, settings).midpoint();
}

/// Projects the unconstrained optimum onto [L, H]; by unimodality of U this
/// is the constrained maximizer.
inline double clamp_to_bounds(double unconstrained, const PowerBounds& b) {
  if (unconstrained < b.L) return b.L;
  if (unconstrained > b.H) return b.H;
  return unconstrained;
}

/// EE-optimal feasible power of user (j, k) at bandwidth factor beta.
inline double allocate_power(double beta, const ScenarioConfig& cfg, const ChannelRealization& ch,
                             std::size_t j, std::size_t k, double gamma_j, const GabsSettings& settings = {}) {
  const PowerBounds b = power_bounds(beta, cfg, ch, j, k, gamma_j);
  if (!b.feasible) {
    throw InfeasibleUser("user (" + std::to_string(j) + ", " + std::to_string(k) +
                         "): QoS floor L exceeds cap H at beta " + std::to_string(beta));
  }
  const double a = ch.g(j, k) / (cfg.noise_power + ch.I(j, k));
  const double p_hat =
      gabs_search(a, access_weight(beta, cfg.K()), cfg.circuit_power, cfg.max_user_power / 2.0, settings);
  return clamp_to_bounds(p_hat, b);
}

} // namespace hetnet
