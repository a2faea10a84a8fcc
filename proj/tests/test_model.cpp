// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "jfcbd/model.hpp"
#include "test_support.hpp"

using namespace jfcbd;
using jfcbd::testing::ToySpec;
using jfcbd::testing::toy_instance;

namespace {

CMat random_beams(int N, int K, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  CMat w(N, K);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = cd(n(rng), n(rng));
  return w;
}

/// Covariance whose illumination a^H Sigma R Sigma^H a equals `value`.
CMat covariance_with_illumination(const ProblemInstance& inst, double value) {
  const CVec v = inst.sigma_diag().conjugate().cwiseProduct(inst.a_t());
  const double n2 = v.squaredNorm();
  return value / (n2 * n2) * v * v.adjoint();
}

ToySpec one_user() {
  ToySpec s;
  s.K = 1;
  return s;
}

}  // namespace

TEST(CommSinr, MatchedFilterSingleUser) {
  const ProblemInstance inst = toy_instance(one_user());
  const CVec& h = inst.h(0);
  const double c = 1.7;
  const CMat w = c * h / h.norm();
  const double sinr = comm_sinr(inst, w, RVec::Zero(inst.tx_total()), 0);
  EXPECT_NEAR(sinr, c * c * h.squaredNorm() / inst.sigma_v2(), 1e-12);
}

TEST(CommSinr, OrthogonalBeamGivesZero) {
  const ProblemInstance inst = toy_instance(one_user());
  const CVec& h = inst.h(0);
  CVec x = CVec::Ones(h.size());
  x -= (h.dot(x) / h.squaredNorm()) * h;  // remove the h component
  EXPECT_NEAR(comm_sinr(inst, x, RVec::Zero(inst.tx_total()), 0), 0.0, 1e-28);
}

TEST(CommSinr, MatchesBruteForceEvaluation) {
  const ProblemInstance inst = toy_instance({});
  const CMat w = random_beams(inst.tx_total(), 2, 9);
  RVec q(inst.tx_total());
  for (int n = 0; n < q.size(); ++n) q(n) = 0.1 * (n + 1);
  for (int k = 0; k < 2; ++k) {
    const CVec& h = inst.h(k);
    double num = 0.0, den = inst.sigma_v2();
    for (int i = 0; i < 2; ++i) {
      cd ip = 0.0;
      for (int n = 0; n < h.size(); ++n) ip += std::conj(h(n)) * w(n, i);
      (i == k ? num : den) += std::norm(ip);
    }
    for (int n = 0; n < h.size(); ++n) den += std::norm(h(n)) * q(n);
    EXPECT_NEAR(comm_sinr(inst, w, q, k), num / den, 1e-12 * num / den);
  }
}

TEST(DlRate, SevenOverOneIsThreeBits) {
  CMat w = CMat::Zero(2, 2);
  w(0, 0) = cd(2.0, 0.0);
  w(0, 1) = cd(1.0, std::sqrt(2.0));  // |.|^2 = 3, total 7
  const RVec q = RVec::Constant(2, 1.0);
  EXPECT_NEAR(dl_rate(w, q, 0), 3.0, 1e-14);
  EXPECT_EQ(dl_rate(w, q, 1), 0.0);
}

TEST(DlRate, SignalWithoutNoiseIsAnError) {
  CMat w = CMat::Zero(2, 1);
  w(1, 0) = 1.0;
  EXPECT_THROW(dl_rate(w, RVec::Zero(2), 1), DomainError);
  EXPECT_EQ(dl_rate(w, RVec::Zero(2), 0), 0.0);
}

TEST(DlRate, OptimalNoiseMakesEveryLoadedAntennaTight) {
  const ProblemInstance inst = toy_instance({});
  const CMat w = random_beams(inst.tx_total(), 2, 4);
  const RVec q = optimal_q_dl(inst, w);
  for (int n = 0; n < inst.tx_total(); ++n) EXPECT_NEAR(dl_rate(w, q, n), inst.dl_capacity(), 1e-12);
  EXPECT_NEAR(inst.dl_capacity(), 3.0, 1e-14);
}

TEST(UlRate, ZeroSignalAtCompressionFloor) {
  const ProblemInstance inst = toy_instance({});
  const CMat R = CMat::Zero(inst.tx_total(), inst.tx_total());
  const RVec q = RVec::Constant(inst.rx_antennas(), inst.sigma_z2() * inst.beta());
  for (int m = 0; m < inst.rx_antennas(); ++m) EXPECT_NEAR(ul_rate(inst, R, q, m), 3.0, 1e-13);
}

TEST(UlRate, HandEvaluatedExample) {
  const ProblemInstance inst = toy_instance({});  // M = 4, sigma_z^2 = 1
  const CMat R = covariance_with_illumination(inst, 28.0);
  EXPECT_NEAR(target_illumination(inst, R), 28.0, 1e-12);
  const RVec q = RVec::Constant(4, 8.0 / 7.0);
  EXPECT_NEAR(ul_rate(inst, R, q, 0), 3.0, 1e-13);
}

TEST(UlRate, RejectsNonPositiveNoise) {
  const ProblemInstance inst = toy_instance({});
  const CMat R = CMat::Zero(inst.tx_total(), inst.tx_total());
  EXPECT_THROW(ul_rate(inst, R, RVec::Zero(4), 0), DomainError);
}

TEST(OptimalQul, HandEvaluatedExample) {
  const ProblemInstance inst = toy_instance({});
  const RVec q = optimal_q_ul(inst, covariance_with_illumination(inst, 28.0));
  ASSERT_EQ(q.size(), 4);
  for (int m = 0; m < 4; ++m) EXPECT_NEAR(q(m), 8.0 / 7.0, 1e-13);
}

TEST(OptimalQul, ZeroCovariance) {
  const ProblemInstance inst = toy_instance({});
  const RVec q = optimal_q_ul(inst, CMat::Zero(inst.tx_total(), inst.tx_total()));
  for (int m = 0; m < 4; ++m) EXPECT_NEAR(q(m), inst.beta() * inst.sigma_z2(), 1e-16);
}

TEST(OptimalQul, AnyCovarianceMakesUplinkTight) {
  const ProblemInstance inst = toy_instance({});
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CMat w = random_beams(inst.tx_total(), 2, seed, 0.3 * seed);
    const CMat R = transmit_covariance(w, optimal_q_dl(inst, w));
    const RVec q = optimal_q_ul(inst, R);
    for (int m = 0; m < 4; ++m) EXPECT_NEAR(ul_rate(inst, R, q, m), inst.ul_capacity(), 1e-12);
  }
}

TEST(SensingSinr, ZeroIllumination) {
  const ProblemInstance inst = toy_instance({});
  const CMat R = CMat::Zero(inst.tx_total(), inst.tx_total());
  EXPECT_EQ(sensing_sinr(inst, R, RVec::Constant(4, 0.2)), 0.0);
}

TEST(SensingSinr, EffectiveThresholdReachesTarget) {
  ToySpec s;
  s.gamma_s = 3.0;
  const ProblemInstance inst = toy_instance(s);
  const CMat R = covariance_with_illumination(inst, inst.gamma_tilde_s());
  EXPECT_NEAR(sensing_sinr(inst, R, optimal_q_ul(inst, R)), 3.0, 1e-12);
}

TEST(SensingSinr, EffectiveThresholdFormula) {
  ToySpec s;
  s.gamma_s = 3.0;
  s.beta = 0.5;
  const ProblemInstance inst = toy_instance(s);
  EXPECT_NEAR(inst.gamma_tilde_s(), 4.0 * 3.0 * 1.5 / (4.0 - 1.5), 1e-14);
}

TEST(SensingSinr, LinearInCovariance) {
  const ProblemInstance inst = toy_instance({});
  const CMat w = random_beams(inst.tx_total(), 2, 6);
  const CMat R = transmit_covariance(w, optimal_q_dl(inst, w));
  const RVec q = RVec::Constant(4, 0.37);
  EXPECT_NEAR(sensing_sinr(inst, 2.0 * R, q), 2.0 * sensing_sinr(inst, R, q), 1e-12);
}

TEST(SensingSinr, EqualNoiseReducesToScalarDivision) {
  const ProblemInstance inst = toy_instance({});
  const CMat R = covariance_with_illumination(inst, 5.0);
  EXPECT_NEAR(sensing_sinr(inst, R, RVec::Constant(4, 0.25)), 5.0 / 1.25, 1e-12);
}

TEST(Objective, ClosedFormNoiseScalesPower) {
  const ProblemInstance inst = toy_instance({});
  Solution sol;
  sol.w = random_beams(inst.tx_total(), 2, 8);
  complete_solution(inst, sol);
  EXPECT_NEAR(sol.objective, (1.0 + inst.alpha()) * sol.w.squaredNorm(), 1e-12);
  EXPECT_TRUE((sol.q_dl.array() >= 0.0).all());
  EXPECT_TRUE((sol.q_ul.array() > 0.0).all());
}

TEST(DerivedMatrices, HermitianPsd) {
  const ProblemInstance inst = toy_instance({});
  for (int k = 0; k < inst.users(); ++k) {
    EXPECT_LT((inst.A(k) - inst.A(k).adjoint()).norm(), 1e-14);
    EXPECT_GT(hermitian_eigenvalues(inst.A(k)).minCoeff(), -1e-12);
    EXPECT_LT((inst.H(k) - inst.h(k) * inst.h(k).adjoint()).norm(), 1e-14);
  }
  EXPECT_LT((inst.B() - inst.B().adjoint()).norm(), 1e-14);
}

TEST(DerivedMatrices, TargetMatrixEigenvalueBounds) {
  for (double g : {0.5, 1.0, 2.0}) {
    ToySpec s;
    s.g_abs = g;
    const ProblemInstance inst = toy_instance(s);
    const RVec ev = hermitian_eigenvalues(inst.B());
    const double lo = inst.alpha() * g * g / s.Nt;
    const double hi = (inst.tx_total() + inst.alpha()) * g * g / s.Nt;
    EXPECT_GE(ev.minCoeff(), lo * (1 - 1e-12));
    EXPECT_LE(ev.maxCoeff(), hi * (1 + 1e-12));
  }
}

TEST(CompressionConstant, ThreeBitsIsOneSeventh) {
  EXPECT_NEAR(compression_constant(3.0), 1.0 / 7.0, 1e-16);
  EXPECT_NEAR(capacity_from_constant(1.0 / 7.0), 3.0, 1e-14);
  EXPECT_THROW(compression_constant(0.0), DomainError);
}

TEST(Feasibility, TightPointIsFeasibleAndShrunkPointIsNot) {
  const ProblemInstance inst = toy_instance(one_user());
  const CVec& h = inst.h(0);
  // Matched filter with power chosen so the SINR is exactly Gamma: with
  // q = alpha |w|^2, SINR = p |h|^2 / (alpha p sum |h_n|^4 / |h|^2 + sigma).
  const double h2 = h.squaredNorm();
  const double h4 = h.cwiseAbs2().squaredNorm();
  const double G = inst.gamma(0);
  const double p = G * inst.sigma_v2() / (h2 - G * inst.alpha() * h4 / h2);
  ASSERT_GT(p, 0.0);
  Solution sol;
  sol.w = std::sqrt(p) * h / h.norm();
  complete_solution(inst, sol);
  const double gain = target_illumination(inst, transmit_covariance(sol.w, sol.q_dl));
  if (gain < inst.gamma_tilde_s()) {
    sol.w *= std::sqrt(inst.gamma_tilde_s() / gain);
    complete_solution(inst, sol);
  }
  const FeasibilityReport ok = check_feasibility(inst, sol, 1e-9);
  EXPECT_TRUE(ok.feasible) << ok.min_slack();

  Solution low = sol;
  low.w *= std::sqrt(0.9);
  complete_solution(inst, low);
  const FeasibilityReport bad = check_feasibility(inst, low, 1e-9);
  EXPECT_FALSE(bad.feasible);
  EXPECT_LT(bad.min_slack(), 0.0);
}

TEST(Feasibility, RateViolationFromUndersizedNoise) {
  const ProblemInstance inst = toy_instance({});
  Solution sol;
  sol.w = random_beams(inst.tx_total(), 2, 2, 10.0);
  complete_solution(inst, sol);
  sol.q_dl *= 0.5;
  const FeasibilityReport r = check_feasibility(inst, sol, 1e-9);
  EXPECT_FALSE(r.feasible);
  EXPECT_LT(r.dl_rate_slack.maxCoeff(), 0.0);
}

TEST(InstanceBuild, RejectsBadDimensions) {
  InstanceData d;
  d.tx_count = 1;
  d.tx_antennas = 2;
  d.rx_antennas = 2;
  d.h.push_back(CVec::Ones(3));
  d.g = CVec::Ones(1);
  d.a_t = CVec::Ones(2);
  d.a_r = CVec::Ones(2);
  d.gamma_c = RVec::Ones(1);
  EXPECT_THROW(ProblemInstance::build(d), DomainError);
}
