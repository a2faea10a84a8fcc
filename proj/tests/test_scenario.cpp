// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jfcbd/scenario.hpp"

using namespace jfcbd;

TEST(PathLoss, ReferenceDistances) {
  EXPECT_NEAR(path_loss_db(1000.0), 128.1, 1e-12);
  EXPECT_NEAR(path_loss_db(100.0), 90.5, 1e-12);
  EXPECT_NEAR(path_loss_db(10000.0), 165.7, 1e-12);
}

TEST(PathLoss, LinearGainMatchesDb) {
  EXPECT_NEAR(path_gain(1000.0) / std::pow(10.0, -12.81), 1.0, 1e-12);
}

TEST(PathLoss, StrictlyIncreasing) {
  double prev = path_loss_db(1.0);
  for (double d = 2.0; d < 1e5; d *= 1.37) {
    const double v = path_loss_db(d);
    EXPECT_GT(v, prev) << "d = " << d;
    prev = v;
  }
}

TEST(PathLoss, RejectsNonPositiveDistance) {
  EXPECT_THROW(path_loss_db(0.0), DomainError);
  EXPECT_THROW(path_loss_db(-5.0), DomainError);
}

TEST(SteeringVector, Broadside) {
  const CVec a = steering_vector(std::numbers::pi / 2, 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(a(i) - cd(0.5, 0.0)), 0.0, 1e-15);
}

TEST(SteeringVector, Endfire) {
  const CVec a = steering_vector(0.0, 2);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(a(0) - cd(r, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(1) - cd(-r, 0.0)), 0.0, 1e-15);
}

TEST(SteeringVector, SingleAntenna) {
  const CVec a = steering_vector(0.77, 1);
  ASSERT_EQ(a.size(), 1);
  EXPECT_NEAR(std::abs(a(0) - cd(1.0, 0.0)), 0.0, 1e-15);
}

TEST(SteeringVector, UnitNormWithRealFirstEntry) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(0.0, std::numbers::pi);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 40;
    const CVec a = steering_vector(th(rng), n);
    EXPECT_NEAR(a.norm(), 1.0, 1e-13);
    EXPECT_NEAR(a(0).real(), 1.0 / std::sqrt(double(n)), 1e-15);
    EXPECT_EQ(a(0).imag(), 0.0);
  }
}

TEST(SteeringVector, RejectsZeroLength) { EXPECT_THROW(steering_vector(0.1, 0), DomainError); }

TEST(Instance, SameSeedIsBitIdentical) {
  SystemConfig cfg;
  cfg.seed = 42;
  const ProblemInstance a = generate_instance(cfg);
  const ProblemInstance b = generate_instance(cfg);
  for (int k = 0; k < a.users(); ++k) EXPECT_TRUE(a.h(k) == b.h(k));
  EXPECT_TRUE(a.g() == b.g());
  EXPECT_TRUE(a.a_t() == b.a_t());
  EXPECT_TRUE(a.a_r() == b.a_r());
  EXPECT_EQ(a.gamma_tilde_s(), b.gamma_tilde_s());
}

TEST(Instance, DifferentSeedsDiffer) {
  SystemConfig cfg;
  cfg.seed = 1;
  const ProblemInstance a = generate_instance(cfg);
  cfg.seed = 2;
  const ProblemInstance b = generate_instance(cfg);
  EXPECT_FALSE(a.h(0) == b.h(0));
}

TEST(Instance, LargeDeploymentCompressionConstants) {
  SystemConfig cfg;
  cfg.tx_count = 2;
  cfg.tx_antennas = 32;
  cfg.rx_antennas = 32;
  cfg.users = 16;
  cfg.dl_capacity_bps = 30e6;
  cfg.ul_capacity_bps = 30e6;
  cfg.bandwidth_hz = 10e6;
  const ProblemInstance inst = generate_instance(cfg);
  EXPECT_NEAR(inst.alpha(), 1.0 / 7.0, 1e-15);
  EXPECT_NEAR(inst.beta(), 1.0 / 7.0, 1e-15);
  EXPECT_EQ(inst.tx_total(), 64);
  EXPECT_EQ(inst.users(), 16);
}

TEST(Instance, SteeringBlocksAreUnitNorm) {
  SystemConfig cfg;
  cfg.tx_count = 3;
  cfg.users = 3;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    cfg.seed = seed;
    const ProblemInstance inst = generate_instance(cfg);
    EXPECT_NEAR(inst.a_t().squaredNorm(), 3.0, 1e-12);
    for (int l = 0; l < 3; ++l)
      EXPECT_NEAR(inst.a_t().segment(l * cfg.tx_antennas, cfg.tx_antennas).norm(), 1.0, 1e-13);
    EXPECT_NEAR(inst.a_r().norm(), 1.0, 1e-13);
  }
}

TEST(Instance, NoisePowerFromDensity) {
  SystemConfig cfg;
  const ProblemInstance inst = generate_instance(cfg);
  const double expected = std::pow(10.0, (-174.0 + 70.0 - 30.0) / 10.0);
  EXPECT_NEAR(inst.sigma_v2() / expected, 1.0, 1e-12);
  EXPECT_EQ(inst.sigma_v2(), inst.sigma_z2());
}

TEST(Instance, ChannelEnergyConcentratesAtOneKilometre) {
  std::mt19937_64 rng(5);
  const std::vector<double> d{1000.0, 1000.0};
  const int Nt = 4, N = 8, draws = 20000;
  double mean = 0.0;
  for (int i = 0; i < draws; ++i) mean += draw_user_channel(std::span<const double>(d), Nt, rng).squaredNorm();
  mean /= draws;
  EXPECT_NEAR(mean / (N * std::pow(10.0, -12.81)), 1.0, 0.02);
}

TEST(Instance, UnreachableSensingTargetIsAConstructionError) {
  SystemConfig cfg;
  cfg.ul_capacity_bps = 1e6;  // beta = 1 / (2^0.1 - 1), about 14
  cfg.sensing_sinr_db = 0.0;
  try {
    generate_instance(cfg);
    FAIL() << "expected a construction error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("sensing target unreachable"), std::string::npos);
  }
}

TEST(SystemConfigCheck, RejectsTooFewAntennas) {
  SystemConfig cfg;
  cfg.tx_count = 1;
  cfg.tx_antennas = 1;
  cfg.users = 2;
  EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(SystemConfigCheck, RejectsMismatchedSinrList) {
  SystemConfig cfg;
  cfg.users = 2;
  cfg.comm_sinr_db = {10.0, 10.0, 10.0};
  EXPECT_THROW(cfg.validate(), DomainError);
}
