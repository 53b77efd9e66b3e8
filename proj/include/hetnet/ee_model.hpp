#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include "hetnet/channel_model.hpp"
#include "hetnet/config.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/matrix.hpp"

namespace hetnet {

inline constexpr double kLn2 = std::numbers::ln2;

/// Largest exponent accepted by 2^x before the power is reported as
/// unreachable.
inline constexpr double kMaxRateExponent = 1024.0;

/// log2(1 + x) computed through log1p.
inline double log2_1p(double x) { return std::log1p(x) / kLn2; }

/// 2^x - 1 computed through expm1.
inline double exp2_m1(double x) { return std::expm1(x * kLn2); }

/// Neumaier-compensated sum.
inline double compensated_sum(std::span<const double> xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

/// Per-user constants of the rate function r(p) = w * log2(1 + a p).
struct LinkCoefficients {
  double eff_gain = 0.0;  // a = g / (sigma^2 + I), per watt
  double weight = 0.0;    // w = (1 - beta) / K
};

inline double access_weight(double beta, std::size_t K) { return (1.0 - beta) / static_cast<double>(K); }

/// a[j][k] = g / (sigma^2 + I). Computed once per trial.
inline Matrix effective_gains(const ScenarioConfig& cfg, const ChannelRealization& ch) {
  Matrix a(ch.g.rows(), ch.g.cols());
  for (std::size_t j = 0; j < a.rows(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) a(j, k) = ch.g(j, k) / (cfg.noise_power + ch.I(j, k));
  return a;
}

/// r = ((1 - beta) / K) * log2(1 + a p). Exactly zero at p = 0.
inline double user_rate(double beta, double p, double eff_gain, std::size_t K) {
  if (p == 0.0) return 0.0;
  return access_weight(beta, K) * log2_1p(eff_gain * p);
}

/// Inverse of user_rate: p = (2^{K r / (1 - beta)} - 1) / a.
inline double power_for_rate(double rate, double beta, double eff_gain, std::size_t K) {
  const double exponent = static_cast<double>(K) * rate / (1.0 - beta);
  if (!(exponent <= kMaxRateExponent)) {
    throw InfeasibleRate("rate " + std::to_string(rate) + " needs 2^" + std::to_string(exponent) +
                         " power scaling");
  }
  return exp2_m1(exponent) / eff_gain;
}

/// log2(1 + ((N - B + 1) / B) * gamma): spectral efficiency of the
/// zero-forcing beamformed backhaul before the beta share.
inline double backhaul_log_term(int antennas, int group, double gamma) {
  const double gain = static_cast<double>(antennas - group + 1) / static_cast<double>(group);
  return log2_1p(gain * gamma);
}

inline double backhaul_log_term(const ScenarioConfig& cfg, double gamma) {
  return backhaul_log_term(cfg.antenna_array, cfg.beamforming_group, gamma);
}

/// C_j = beta * log2(1 + ((N - B + 1) / B) * gamma_j).
inline double backhaul_capacity(double beta, int antennas, int group, double gamma) {
  return beta * backhaul_log_term(antennas, group, gamma);
}

inline double backhaul_capacity(double beta, const ScenarioConfig& cfg, double gamma) {
  return backhaul_capacity(beta, cfg.antenna_array, cfg.beamforming_group, gamma);
}

/// R_j, the sum of per-user rates.
inline double cell_throughput(std::span<const double> rates) { return compensated_sum(rates); }

/// U = r / (Pc + p), bits/Hz/J.
inline double user_ee(double beta, double p, double eff_gain, std::size_t K, double circuit_power) {
  return user_rate(beta, p, eff_gain, K) / (circuit_power + p);
}

/// Same as user_ee with the weight already folded in.
inline double user_ee_weighted(double p, double eff_gain, double weight, double circuit_power) {
  if (p == 0.0) return 0.0;
  return weight * log2_1p(eff_gain * p) / (circuit_power + p);
}

/// Rate matrix r[j][k] at (beta, P).
inline Matrix rate_matrix(double beta, const PowerMatrix& P, const ChannelRealization& ch,
                          const ScenarioConfig& cfg) {
  Matrix r(P.rows(), P.cols());
  for (std::size_t j = 0; j < P.rows(); ++j)
    for (std::size_t k = 0; k < P.cols(); ++k)
      r(j, k) = user_rate(beta, P(j, k), ch.g(j, k) / (cfg.noise_power + ch.I(j, k)), cfg.K());
  return r;
}

/// Total energy efficiency of all small-cell users, sum_j sum_k U_jk.
inline double total_ee(double beta, const PowerMatrix& P, const ChannelRealization& ch,
                       const ScenarioConfig& cfg) {
  double sum = 0.0;
  for (std::size_t j = 0; j < P.rows(); ++j)
    for (std::size_t k = 0; k < P.cols(); ++k) {
      const double a = ch.g(j, k) / (cfg.noise_power + ch.I(j, k));
      sum += user_ee(beta, P(j, k), a, cfg.K(), cfg.circuit_power);
    }
  return sum;
}

/// r'(p) = w a / (ln 2 (1 + a p)).
inline double rate_derivative(double p, double eff_gain, double weight) {
  return weight * eff_gain / (kLn2 * (1.0 + eff_gain * p));
}

/// f(p) = (Pc + p) r'(p) - r(p). dU/dp = f(p) / (Pc + p)^2, so f carries the
/// sign of the EE gradient. Strictly decreasing in p, positive at 0.
inline double ee_gradient_f(double p, double eff_gain, double weight, double circuit_power) {
  return (circuit_power + p) * rate_derivative(p, eff_gain, weight) -
         weight * log2_1p(eff_gain * p);
}

} // namespace hetnet
