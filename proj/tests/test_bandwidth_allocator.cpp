#include <cmath>

#include <gtest/gtest.h>

#include "hetnet/bandwidth_allocator.hpp"
#include "hetnet/certify.hpp"
#include "test_support.hpp"

using namespace hetnet;

TEST(Phi, ClosedForm) {
  // S = 3, K = 2, C_log = 6: phi = 3 / (12 + 3) = 0.2.
  EXPECT_NEAR(phi_from_terms(3.0, 6.0, 2), 0.2, 1e-15);
  EXPECT_EQ(phi_from_terms(0.0, 6.0, 2), 0.0);
}

TEST(Phi, BalancesBackhaulAndAccess) {
  ScenarioConfig cfg;
  const auto inst = make_instance(cfg, 8);
  const auto gammas = backhaul_snrs(cfg, inst.channels);
  PowerMatrix P(cfg.J(), cfg.K(), 0.03);
  for (std::size_t j = 0; j < cfg.J(); ++j) {
    const double phi = phi_j(P.row(j), inst.channels, cfg, j, gammas[j]);
    const Matrix r = rate_matrix(phi, P, inst.channels, cfg);
    EXPECT_NEAR(cell_throughput(r.row(j)), backhaul_capacity(phi, cfg, gammas[j]), 1e-12);
  }
}

TEST(BetaOptimal, MaxOfPhiWithLowestIndexTie) {
  const ScenarioConfig cfg = fixtures::small_config(3, 2);
  auto ch = fixtures::flat_channels(cfg, 1e-9, 1e-13, {1e-8, 1e-10, 1e-10});
  const auto gammas = backhaul_snrs(cfg, ch);
  const PowerMatrix P(3, 2, 0.05);
  const auto sol = beta_optimal(P, ch, cfg, gammas);
  ASSERT_EQ(sol.phi.size(), 3u);
  EXPECT_EQ(sol.phi[1], sol.phi[2]);
  EXPECT_GT(sol.phi[1], sol.phi[0]);
  EXPECT_EQ(sol.binding_cell, 1u);
  EXPECT_EQ(sol.beta, sol.phi[1]);
  EXPECT_TRUE(sol.feasible);
}

TEST(BetaOptimal, SmallestBetaSatisfyingEveryBackhaul) {
  ScenarioConfig cfg;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = make_instance(cfg, seed);
    const auto gammas = backhaul_snrs(cfg, inst.channels);
    const PowerMatrix P(cfg.J(), cfg.K(), cfg.max_user_power / 2.0);
    const auto sol = beta_optimal(P, inst.channels, cfg, gammas);
    const auto at = certify_allocation(cfg, inst.channels, sol.beta, P);
    EXPECT_TRUE(at.c2_backhaul) << at.first_violation;
    EXPECT_LT(at.binding_gap, 1e-9);
    EXPECT_EQ(at.binding_cell, sol.binding_cell);
    const auto below = certify_allocation(cfg, inst.channels, sol.beta * (1 - 1e-6), P, 0.0);
    EXPECT_FALSE(below.c2_backhaul);
  }
}

TEST(Qos, VarphiIsRateAtChosenBeta) {
  ScenarioConfig cfg;
  const auto inst = make_instance(cfg, 4);
  const auto gammas = backhaul_snrs(cfg, inst.channels);
  const PowerMatrix P(cfg.J(), cfg.K(), cfg.max_user_power / 2.0);
  const auto sol = beta_optimal(P, inst.channels, cfg, gammas);
  const auto qos = qos_feasibility(P, inst.channels, cfg, gammas);
  const Matrix r = rate_matrix(sol.beta, P, inst.channels, cfg);
  double min_rate = 1e300;
  for (double v : r.flat()) min_rate = std::min(min_rate, v);
  EXPECT_NEAR(qos.min_varphi, min_rate, 1e-12);
}

TEST(Qos, GateAgreesWithChecker) {
  ScenarioConfig cfg;
  int admitted = 0, rejected = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = make_instance(cfg, seed);
    const auto gammas = backhaul_snrs(cfg, inst.channels);
    const PowerMatrix P(cfg.J(), cfg.K(), cfg.max_user_power / 2.0);
    const auto qos = qos_feasibility(P, inst.channels, cfg, gammas);
    const double beta = beta_optimal(P, inst.channels, cfg, gammas).beta;
    const auto rep = certify_allocation(cfg, inst.channels, beta, P, 0.0);
    EXPECT_EQ(qos.feasible, rep.c3_qos) << "seed " << seed;
    (qos.feasible ? admitted : rejected)++;
  }
  EXPECT_GT(admitted, 0);
}

TEST(Qos, HugeFloorIsInfeasible) {
  ScenarioConfig cfg;
  cfg.qos_rate = 100.0;
  const auto inst = make_instance(cfg, 1);
  const PowerMatrix P(cfg.J(), cfg.K(), 0.05);
  EXPECT_FALSE(qos_feasibility(P, inst.channels, cfg, backhaul_snrs(cfg, inst.channels)).feasible);
}
