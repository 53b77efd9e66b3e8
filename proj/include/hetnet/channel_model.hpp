#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "hetnet/config.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/matrix.hpp"
#include "hetnet/random.hpp"

namespace hetnet {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Topology {
  Point macro_position;
  std::vector<Point> small_cell_positions;  // J
  Grid<Point> user_positions;               // J x K
  bool operator==(const Topology&) const = default;
};

/// Per-trial channel power gains, all linear.
struct ChannelRealization {
  Matrix g;                         // small cell j -> its user k
  Matrix G_user;                    // macro -> user (j, k)
  std::vector<double> G_backhaul;   // macro -> small cell BS j
  Matrix I;                         // macro interference P0 * G_user, watts
  bool operator==(const ChannelRealization&) const = default;
};

inline constexpr int kMaxPlacementAttempts = 100'000;

namespace detail {

/// Area-uniform point in the annulus r_min <= r <= r_max around `center`.
inline Point sample_annulus(Rng& rng, Point center, double r_min, double r_max) {
  const double u = rng.uniform();
  const double r = std::sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min));
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

} // namespace detail

/// Stream tags. Each cell and each user draws from its own substream, so a
/// scenario with more cells or users keeps the draws of the existing ones.
inline constexpr std::uint64_t kCellPlacementTag = 0x5CE11000ULL;
inline constexpr std::uint64_t kUserPlacementTag = 0x05E12000ULL;
inline constexpr std::uint64_t kBackhaulLinkTag = 0xBAC4A000ULL;
inline constexpr std::uint64_t kAccessLinkTag = 0xACCE5000ULL;

namespace detail {

inline Rng substream(std::uint64_t root, std::uint64_t tag, std::uint64_t j, std::uint64_t k = 0) {
  return Rng(splitmix64(splitmix64(splitmix64(root ^ tag) ^ j) ^ k));
}

} // namespace detail

/// Drops J small cells uniformly in the macro annulus (rejection sampling on
/// the inter-cell spacing, cells placed in index order) and K users uniformly
/// inside each small cell. Small cells stay within
/// macro_radius - small_cell_radius so their users remain inside the
/// macrocell.
inline Topology generate_topology(const ScenarioConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::uint64_t root = rng.next_u64();
  Topology topo;
  topo.macro_position = {0.0, 0.0};
  const double r_max = cfg.macro_radius - cfg.small_cell_radius;

  Rng cell_rng = detail::substream(root, kCellPlacementTag, 0);
  topo.small_cell_positions.reserve(cfg.J());
  for (std::size_t j = 0; j < cfg.J(); ++j) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const Point cand = detail::sample_annulus(cell_rng, topo.macro_position, cfg.min_macro_distance, r_max);
      placed = true;
      for (const Point& other : topo.small_cell_positions) {
        if (distance(cand, other) < cfg.min_intercell_distance) {
          placed = false;
          break;
        }
      }
      if (placed) topo.small_cell_positions.push_back(cand);
    }
    if (!placed) {
      throw PlacementFailure("could not place small cell " + std::to_string(j) + " of " +
                             std::to_string(cfg.J()) + " after " +
                             std::to_string(kMaxPlacementAttempts) + " attempts");
    }
  }

  topo.user_positions = Grid<Point>(cfg.J(), cfg.K());
  for (std::size_t j = 0; j < cfg.J(); ++j) {
    for (std::size_t k = 0; k < cfg.K(); ++k) {
      Rng user_rng = detail::substream(root, kUserPlacementTag, j, k);
      topo.user_positions(j, k) =
          detail::sample_annulus(user_rng, topo.small_cell_positions[j], 0.0, cfg.small_cell_radius);
    }
  }
  return topo;
}

/// Lognormal shadowing factor, 10*log10(factor) ~ N(0, stddev_db^2).
inline double draw_shadowing_factor(Rng& rng, double stddev_db) {
  if (stddev_db == 0.0) return 1.0;
  return std::pow(10.0, stddev_db * rng.normal() / 10.0);
}

/// Rayleigh fading in the power domain: unit-mean exponential.
inline double draw_rayleigh_power(Rng& rng) { return rng.exponential(); }

/// Draws pathloss x shadowing x fading for every access and interference
/// link, and pathloss x shadowing for the beamformed backhaul.
inline ChannelRealization realize_channels(const ScenarioConfig& cfg, const Topology& topo, Rng& rng) {
  const std::size_t J = cfg.J();
  const std::size_t K = cfg.K();
  const std::uint64_t root = rng.next_u64();
  auto link_distance = [&](Point a, Point b) { return std::max(distance(a, b), cfg.min_link_distance); };
  auto fading = [&](Rng& r) { return cfg.rayleigh_fading ? draw_rayleigh_power(r) : 1.0; };

  ChannelRealization ch;
  ch.g = Matrix(J, K);
  ch.G_user = Matrix(J, K);
  ch.I = Matrix(J, K);
  ch.G_backhaul.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    Rng bh_rng = detail::substream(root, kBackhaulLinkTag, j);
    const double d_bh = link_distance(topo.macro_position, topo.small_cell_positions[j]);
    ch.G_backhaul[j] =
        cfg.backhaul_pathloss.gain(d_bh) * draw_shadowing_factor(bh_rng, cfg.backhaul_shadowing_stddev);
    for (std::size_t k = 0; k < K; ++k) {
      Rng link_rng = detail::substream(root, kAccessLinkTag, j, k);
      const Point u = topo.user_positions(j, k);
      const double d_access = link_distance(topo.small_cell_positions[j], u);
      ch.g(j, k) = cfg.small_cell_pathloss.gain(d_access) *
                   draw_shadowing_factor(link_rng, cfg.shadowing_stddev) * fading(link_rng);
      const double d_macro = link_distance(topo.macro_position, u);
      ch.G_user(j, k) = cfg.macro_pathloss.gain(d_macro) *
                        draw_shadowing_factor(link_rng, cfg.shadowing_stddev) * fading(link_rng);
      ch.I(j, k) = cfg.per_antenna_power * ch.G_user(j, k);
    }
  }
  return ch;
}

/// Backhaul SNR gamma_j = P0 * G_j / sigma^2.
inline double backhaul_snr(const ScenarioConfig& cfg, const ChannelRealization& ch, std::size_t j) {
  return cfg.per_antenna_power * ch.G_backhaul.at(j) / cfg.noise_power;
}

inline std::vector<double> backhaul_snrs(const ScenarioConfig& cfg, const ChannelRealization& ch) {
  std::vector<double> out(ch.G_backhaul.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = backhaul_snr(cfg, ch, j);
  return out;
}

/// Access SINR p * g / (sigma^2 + I).
inline double access_sinr(const ScenarioConfig& cfg, const ChannelRealization& ch, double p,
                          std::size_t j, std::size_t k) {
  return p * ch.g(j, k) / (cfg.noise_power + ch.I(j, k));
}

/// Builds topology and channels for one trial from a single seed.
struct TrialInstance {
  Topology topology;
  ChannelRealization channels;
};

inline TrialInstance make_instance(const ScenarioConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  TrialInstance inst;
  inst.topology = generate_topology(cfg, rng);
  inst.channels = realize_channels(cfg, inst.topology, rng);
  return inst;
}

} // namespace hetnet
