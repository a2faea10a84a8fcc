// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "jfcbd/pd_solver.hpp"
#include "jfcbd/sdr_oracle.hpp"
#include "test_support.hpp"

using namespace jfcbd;
using jfcbd::testing::desk_instance;
using jfcbd::testing::ToySpec;
using jfcbd::testing::toy_instance;

namespace {

CMat random_complex(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cd(n(rng), n(rng));
  return m;
}

}  // namespace

TEST(Embedding, RoundTrip) {
  std::mt19937_64 rng(1);
  const CMat a = random_complex(5, 5, rng);
  const CMat h = hermitian_part(a);
  EXPECT_LT((extract_hermitian(embed_hermitian(h)) - h).norm(), 1e-14);
}

TEST(Embedding, TraceIdentity) {
  std::mt19937_64 rng(2);
  const CMat c = hermitian_part(random_complex(4, 4, rng));
  const CMat g = random_complex(4, 4, rng);
  const CMat w = g * g.adjoint();
  const double complex_trace = (c * w).trace().real();
  const double real_trace = 0.5 * (embed_hermitian(c) * embed_hermitian(w)).trace();
  EXPECT_NEAR(complex_trace, real_trace, 1e-12 * std::abs(complex_trace));
}

TEST(Embedding, PsdPreserved) {
  std::mt19937_64 rng(3);
  const CMat g = random_complex(3, 2, rng);
  const RVec ev = symmetric_eigenvalues(embed_hermitian(g * g.adjoint()));
  EXPECT_GT(ev.minCoeff(), -1e-12);
}

TEST(Assemble, SingleUserCounts) {
  ToySpec s;
  s.K = 1;
  const SdpProblem p = assemble_sdp(toy_instance(s));
  EXPECT_EQ(p.variables(), 1);
  EXPECT_EQ(p.constraints(), 2);
}

TEST(Assemble, LosslessCollapse) {
  ToySpec s;
  s.alpha = 0.0;
  const ProblemInstance inst = toy_instance(s);
  for (int k = 0; k < inst.users(); ++k) EXPECT_LT((inst.A(k) - inst.H(k)).norm(), 1e-15);
  const CVec v = inst.sigma_diag().conjugate().cwiseProduct(inst.a_t());
  EXPECT_LT((inst.B() - v * v.adjoint()).norm(), 1e-14);
}

TEST(Assemble, ConstraintRowsMatchModel) {
  const ProblemInstance inst = desk_instance(4);
  const SdpProblem p = assemble_sdp(inst);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const CMat w = random_complex(inst.tx_total(), inst.users(), rng, 1e-2);
    const RVec v = constraint_values(p, lift(w));
    const RVec q = optimal_q_dl(inst, w);
    for (int k = 0; k < inst.users(); ++k) {
      const double sig = std::norm(inst.h(k).dot(w.col(k)));
      double others = 0.0;
      for (int i = 0; i < inst.users(); ++i)
        if (i != k) others += std::norm(inst.h(k).dot(w.col(i)));
      const double comp = inst.h(k).cwiseAbs2().dot(q);
      // Gamma~ |h^H w_k|^2 - sum_i w_i^H A_k w_i = signal / Gamma - interference - compression
      const double expected = sig / inst.gamma(k) - others - comp;
      EXPECT_NEAR(v(k), expected, 1e-9 * (sig + others + comp));
    }
    const CMat R = transmit_covariance(w, q);
    EXPECT_NEAR(v(inst.users()), target_illumination(inst, R), 1e-10 * v(inst.users()));
    EXPECT_NEAR(objective_value(p, lift(w)), w.squaredNorm() + q.sum(), 1e-12 * w.squaredNorm());
  }
}

TEST(Identities, CommunicationRowEquivalentToSinr) {
  const ProblemInstance inst = toy_instance({});
  const SdpProblem p = assemble_sdp(inst);
  std::mt19937_64 rng(6);
  int met = 0, missed = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const CMat w = random_complex(inst.tx_total(), 2, rng, 2.0);
    const RVec v = constraint_values(p, lift(w));
    const RVec q = optimal_q_dl(inst, w);
    for (int k = 0; k < 2; ++k) {
      const bool row_ok = v(k) >= inst.sigma_v2();
      const bool sinr_ok = comm_sinr(inst, w, q, k) >= inst.gamma(k);
      EXPECT_EQ(row_ok, sinr_ok);
      (row_ok ? met : missed)++;
    }
  }
  EXPECT_GT(met, 0);
  EXPECT_GT(missed, 0);
}

TEST(Identities, SensingReductionBothDirections) {
  ToySpec s;
  s.gamma_s = 4.0;
  const ProblemInstance inst = toy_instance(s);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  int met = 0, missed = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const CMat g = random_complex(inst.tx_total(), 3, rng, u(rng));
    const CMat R = g * g.adjoint();
    const bool reduced = target_illumination(inst, R) >= inst.gamma_tilde_s();
    const bool direct = sensing_sinr(inst, R, optimal_q_ul(inst, R)) >= inst.gamma_s();
    EXPECT_EQ(reduced, direct);
    (reduced ? met : missed)++;
  }
  EXPECT_GT(met, 0);
  EXPECT_GT(missed, 0);
}

TEST(Identities, TargetMatrixCarriesCompressionNoise) {
  const ProblemInstance inst = desk_instance(2);
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const CMat w = random_complex(inst.tx_total(), inst.users(), rng);
    const double via_b = beam_target_gain(inst, w);
    const double via_r = target_illumination(inst, transmit_covariance(w, optimal_q_dl(inst, w)));
    EXPECT_NEAR(via_b, via_r, 1e-12 * via_r);
  }
}

TEST(Interior, TinyProblem) {
  // minimize Tr(X) subject to X_00 + X_11 >= 2, X_00 >= 0.5 on 2x2 symmetric X.
  sdp::Problem p;
  p.c.push_back(RMat::Identity(2, 2));
  RMat a0 = RMat::Identity(2, 2);
  RMat a1 = RMat::Zero(2, 2);
  a1(0, 0) = 1.0;
  p.a = {{a0}, {a1}};
  p.b = RVec(2);
  p.b << 2.0, 0.5;
  const sdp::Result r = sdp::solve(p);
  ASSERT_EQ(r.status, sdp::Status::Optimal);
  EXPECT_NEAR(r.primal_objective, 2.0, 1e-8);
  EXPECT_NEAR(r.dual_objective, 2.0, 1e-8);
}

TEST(Oracle, SingleUserLosslessClosedForm) {
  ToySpec s;
  s.K = 1;
  s.alpha = 0.0;
  s.gamma_s = 1e-9;
  const ProblemInstance inst = toy_instance(s);
  const SdpSolution sol = solve_sdp(inst);
  ASSERT_TRUE(sol.optimal());
  const double expected = inst.sigma_v2() * inst.gamma(0) / inst.h(0).squaredNorm();
  EXPECT_NEAR(sol.primal_value / expected, 1.0, 1e-7);
}

TEST(Oracle, EarlyExitMatchesCommunicationOnlyPower) {
  ToySpec s;
  s.gamma_s = 1e-9;
  const ProblemInstance inst = toy_instance(s);
  const SdpSolution sol = solve_sdp(inst);
  ASSERT_TRUE(sol.optimal());
  const double p4 = (1.0 + inst.alpha()) * solve_p4(inst).w.squaredNorm();
  EXPECT_NEAR(sol.primal_value / p4, 1.0, 1e-7);
}

TEST(Oracle, DualitySandwichAgainstPd) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const ProblemInstance inst = desk_instance(seed);
    const SdpSolution sdp = solve_sdp(inst);
    ASSERT_TRUE(sdp.optimal()) << "seed " << seed << ": " << sdp::to_string(sdp.status);
    EXPECT_LE(sdp.gap, 1e-8);
    for (double r : sdp.min_eigen_ratio) EXPECT_GE(r, -1e-8);
    const Solution pd = solve_jfcbd(inst);
    const double pd_power = (1.0 + inst.alpha()) * pd.w.squaredNorm();
    EXPECT_LE(sdp.primal_value, pd_power * (1.0 + 1e-6)) << "seed " << seed;
    EXPECT_GE(sdp.primal_value, pd_power * (1.0 - 1e-4)) << "seed " << seed;
  }
}

TEST(Oracle, RankOneExtractionIsFeasible) {
  const ProblemInstance inst = desk_instance(3);
  const SdpSolution sdp = solve_sdp(inst);
  ASSERT_TRUE(sdp.optimal());
  const Solution x = extract_rank_one(inst, sdp);
  EXPECT_TRUE(check_feasibility(inst, x, 1e-5).feasible);
  EXPECT_NEAR(x.objective / sdp.primal_value, 1.0, 1e-4);
}

TEST(Certificate, PassesOnMatchingPoint) {
  const ProblemInstance inst = desk_instance(1);
  const Solution pd = solve_jfcbd(inst);
  const CertificateReport rep = certify(inst, pd, solve_sdp(inst), 1e-4);
  EXPECT_TRUE(rep.pass) << rep.relative_gap;
  EXPECT_TRUE(rep.pd_feasible);
  EXPECT_TRUE(rep.sdp_optimal);
}

TEST(Certificate, FivePercentPowerFails) {
  const ProblemInstance inst = desk_instance(1);
  Solution pd = solve_jfcbd(inst);
  pd.w *= std::sqrt(1.05);
  complete_solution(inst, pd);
  const CertificateReport rep = certify(inst, pd, solve_sdp(inst), 1e-4);
  EXPECT_FALSE(rep.pass);
  EXPECT_TRUE(rep.pd_feasible);
  EXPECT_NEAR(rep.relative_gap, 0.05, 1e-4);
}

TEST(Certificate, InfeasiblePointFails) {
  const ProblemInstance inst = desk_instance(1);
  Solution pd = solve_jfcbd(inst);
  pd.w.col(0).setZero();
  complete_solution(inst, pd);
  const CertificateReport rep = certify(inst, pd, solve_sdp(inst), 1.0);
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.pd_feasible);
}
