// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "jfcbd/baseline.hpp"
#include "test_support.hpp"

using namespace jfcbd;
using jfcbd::testing::desk_instance;
using jfcbd::testing::ToySpec;
using jfcbd::testing::toy_instance;

TEST(Baseline, NoScalingWhenSensingAlreadyMet) {
  ToySpec s;
  s.gamma_s = 1e-9;
  const ProblemInstance inst = toy_instance(s);
  const Solution b = solve_separated(inst);
  const P4Result p4 = solve_p4(inst);
  EXPECT_EQ(b.scale, 1.0);
  EXPECT_TRUE(b.early_exit);
  EXPECT_LT((b.w - p4.w).norm(), 1e-15 * p4.w.norm());
}

TEST(Baseline, QuarterGainGivesScaleFour) {
  ToySpec s;
  s.gamma_s = 1e-9;
  const ProblemInstance probe = toy_instance(s);
  const P4Result p4 = solve_p4(probe);
  const double gain = beam_target_gain(probe, p4.w);

  // Pick Gamma_s so that Gamma~_s = 4 * gain.
  const double target = 4.0 * gain;
  const double M = s.M, beta = s.beta, sz = probe.sigma_z2();
  s.gamma_s = target * M / (M * (1.0 + beta) * sz + target * beta);
  const ProblemInstance inst = toy_instance(s);
  ASSERT_NEAR(inst.gamma_tilde_s() / target, 1.0, 1e-12);

  const Solution b = solve_separated(inst);
  EXPECT_NEAR(b.scale, 4.0, 1e-9);
  EXPECT_FALSE(b.early_exit);
  EXPECT_NEAR(b.objective / ((1.0 + inst.alpha()) * p4.w.squaredNorm()), 4.0, 1e-9);
}

TEST(Baseline, ScaleFormula) {
  const ProblemInstance inst = toy_instance({});
  CMat w = CMat::Zero(inst.tx_total(), 2);
  w.col(0) = inst.a_t();
  const double g = beam_target_gain(inst, w);
  EXPECT_NEAR(separation_scale(inst, w), std::max(1.0, inst.gamma_tilde_s() / g), 1e-15);
  EXPECT_EQ(separation_scale(inst, 1e3 * w), 1.0);
  EXPECT_THROW(separation_scale(inst, CMat::Zero(inst.tx_total(), 2)), DomainError);
}

TEST(Baseline, FeasibleAndNeverBelowPd) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ProblemInstance inst = desk_instance(seed);
    const Solution b = solve_separated(inst);
    const Solution pd = solve_jfcbd(inst);
    EXPECT_GE(b.scale, 1.0);
    EXPECT_TRUE(check_feasibility(inst, b, 1e-6).feasible) << "seed " << seed;
    EXPECT_GE(b.objective, pd.objective * (1.0 - 1e-9)) << "seed " << seed;
    if (b.scale > 1.0) EXPECT_GT(b.objective, pd.objective) << "seed " << seed;
  }
}
