// SPDX-License-Identifier: Apache-2.0
//
// Optimization data of the joint fronthaul-compression / beamforming
// problem and every evaluator that works on it: communication and sensing
// SINRs, fronthaul rates, closed-form compression noise, and feasibility
// checking.
//
// Conventions
//   * Beamformers are stored as the columns of an N x K complex matrix.
//   * Rates are in bit per channel use; capacities are C/B.
//   * Powers are in watts.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jfcbd/linalg.hpp"
#include "jfcbd/trace.hpp"

namespace jfcbd {

/// Raw data from which a ProblemInstance is derived. Everything not listed
/// here (Gamma tilde, H_k, A_k, B, ...) is computed by ProblemInstance::build.
struct InstanceData {
  int tx_count = 1;     // L
  int tx_antennas = 1;  // N_t
  int rx_antennas = 1;  // M
  std::vector<CVec> h;  // K user channels, length N = L * N_t
  CVec g;               // L two-way path coefficients
  CVec a_t;             // length N, L unit-norm blocks
  CVec a_r;             // length M, unit norm
  double sigma_v2 = 1.0;  // user noise power
  double sigma_z2 = 1.0;  // sensing receiver noise power
  double alpha = 0.0;     // 1 / (2^{C_dl} - 1); 0 means unlimited DL fronthaul
  double beta = 0.0;      // 1 / (2^{C_ul} - 1); 0 means unlimited UL fronthaul
  RVec gamma_c;           // K linear communication SINR targets
  double gamma_s = 0.0;   // linear sensing SINR target
};

/// Compression constant 1 / (2^c - 1) for a capacity of c bit/use.
inline double compression_constant(double capacity_bits) {
  if (!(capacity_bits > 0.0)) throw DomainError("fronthaul capacity must be positive");
  if (std::isinf(capacity_bits)) return 0.0;
  return 1.0 / std::expm1(capacity_bits * std::log(2.0));
}

/// Inverse of compression_constant: log2(1 + 1/alpha).
inline double capacity_from_constant(double alpha) {
  if (alpha == 0.0) return std::numeric_limits<double>::infinity();
  return std::log2(1.0 + 1.0 / alpha);
}

/// Immutable, fully derived problem data. Safe to share between threads.
class ProblemInstance {
 public:
  static ProblemInstance build(InstanceData d) {
    ProblemInstance p;
    if (d.tx_count < 1 || d.tx_antennas < 1 || d.rx_antennas < 1)
      throw DomainError("antenna and transmitter counts must be >= 1");
    if (d.h.empty()) throw DomainError("at least one user is required");
    p.L_ = d.tx_count;
    p.Nt_ = d.tx_antennas;
    p.N_ = d.tx_count * d.tx_antennas;
    p.M_ = d.rx_antennas;
    p.K_ = static_cast<int>(d.h.size());
    for (const auto& hk : d.h)
      if (hk.size() != p.N_) throw DomainError("user channel length must equal L * N_t");
    if (d.g.size() != p.L_) throw DomainError("need one path coefficient per transmitter");
    if (d.a_t.size() != p.N_) throw DomainError("transmit steering vector must have length N");
    if (d.a_r.size() != p.M_) throw DomainError("receive steering vector must have length M");
    if (d.gamma_c.size() != p.K_) throw DomainError("need one communication SINR target per user");
    if (!(d.sigma_v2 > 0.0) || !(d.sigma_z2 > 0.0)) throw DomainError("noise powers must be positive");
    if (!(d.alpha >= 0.0) || !(d.beta >= 0.0) || !std::isfinite(d.alpha) || !std::isfinite(d.beta))
      throw DomainError("compression constants must be finite and nonnegative");
    for (Eigen::Index k = 0; k < d.gamma_c.size(); ++k)
      if (!(d.gamma_c(k) > 0.0) || !std::isfinite(d.gamma_c(k)))
        throw DomainError("communication SINR targets must be positive and finite");
    if (!(d.gamma_s >= 0.0) || !std::isfinite(d.gamma_s))
      throw DomainError("sensing SINR target must be nonnegative and finite");

    const double margin = p.M_ - d.gamma_s * d.beta;
    if (!(margin > 0.0)) {
      std::ostringstream os;
      os << "sensing target unreachable under UL compression: Gamma_s * beta = " << d.gamma_s * d.beta
         << " must be below M = " << p.M_
         << " (raise the UL fronthaul capacity or lower the sensing SINR target)";
      throw DomainError(os.str());
    }

    p.h_ = std::move(d.h);
    p.g_ = std::move(d.g);
    p.a_t_ = std::move(d.a_t);
    p.a_r_ = std::move(d.a_r);
    p.sigma_v2_ = d.sigma_v2;
    p.sigma_z2_ = d.sigma_z2;
    p.alpha_ = d.alpha;
    p.beta_ = d.beta;
    p.gamma_ = std::move(d.gamma_c);
    p.gamma_s_ = d.gamma_s;

    p.gamma_tilde_ = (1.0 + p.gamma_.array().inverse()).matrix();
    p.gamma_tilde_s_ = p.M_ * p.gamma_s_ * (1.0 + p.beta_) * p.sigma_z2_ / margin;

    p.sigma_diag_.resize(p.N_);
    for (int l = 0; l < p.L_; ++l) p.sigma_diag_.segment(l * p.Nt_, p.Nt_).setConstant(p.g_(l));

    p.H_.reserve(p.K_);
    p.A_.reserve(p.K_);
    for (int k = 0; k < p.K_; ++k) {
      CMat Hk = p.h_[k] * p.h_[k].adjoint();
      Hk = hermitian_part(Hk);
      CMat Ak = Hk;
      Ak.diagonal() += (p.alpha_ * Hk.diagonal().real()).cast<cd>();
      p.H_.push_back(std::move(Hk));
      p.A_.push_back(std::move(Ak));
    }
    // B = Sigma^H (a a^H + alpha / N_t I) Sigma
    const CVec sa = p.sigma_diag_.conjugate().cwiseProduct(p.a_t_);
    CMat B = sa * sa.adjoint();
    B.diagonal() += (p.alpha_ / p.Nt_ * p.sigma_diag_.cwiseAbs2()).cast<cd>();
    p.B_ = hermitian_part(B);

    p.dl_capacity_ = capacity_from_constant(p.alpha_);
    p.ul_capacity_ = capacity_from_constant(p.beta_);
    return p;
  }

  int tx_count() const { return L_; }
  int tx_antennas() const { return Nt_; }
  int tx_total() const { return N_; }
  int rx_antennas() const { return M_; }
  int users() const { return K_; }

  const std::vector<CVec>& h() const { return h_; }
  const CVec& h(int k) const { return h_[k]; }
  const CVec& g() const { return g_; }
  const CVec& a_t() const { return a_t_; }
  const CVec& a_r() const { return a_r_; }
  /// Diagonal of Sigma_g = diag(g_1..g_L) (x) I_{N_t}.
  const CVec& sigma_diag() const { return sigma_diag_; }
  CMat sigma_g() const { return sigma_diag_.asDiagonal(); }

  double sigma_v2() const { return sigma_v2_; }
  double sigma_z2() const { return sigma_z2_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const RVec& gamma() const { return gamma_; }
  double gamma(int k) const { return gamma_(k); }
  const RVec& gamma_tilde() const { return gamma_tilde_; }
  double gamma_tilde(int k) const { return gamma_tilde_(k); }
  double gamma_s() const { return gamma_s_; }
  double gamma_tilde_s() const { return gamma_tilde_s_; }

  const CMat& H(int k) const { return H_[k]; }
  const CMat& A(int k) const { return A_[k]; }
  const CMat& B() const { return B_; }

  /// C_dl / B and C_ul / B in bit per channel use.
  double dl_capacity() const { return dl_capacity_; }
  double ul_capacity() const { return ul_capacity_; }

  double max_gain2() const { return g_.cwiseAbs2().maxCoeff(); }
  double min_gain2() const { return g_.cwiseAbs2().minCoeff(); }

 private:
  ProblemInstance() = default;

  int L_ = 0, Nt_ = 0, N_ = 0, M_ = 0, K_ = 0;
  std::vector<CVec> h_;
  CVec g_, a_t_, a_r_, sigma_diag_;
  double sigma_v2_ = 0, sigma_z2_ = 0, alpha_ = 0, beta_ = 0;
  RVec gamma_, gamma_tilde_;
  double gamma_s_ = 0, gamma_tilde_s_ = 0;
  std::vector<CMat> H_, A_;
  CMat B_;
  double dl_capacity_ = 0, ul_capacity_ = 0;
};

/// A candidate or optimal operating point.
struct Solution {
  std::string method = "pd";
  CMat w;      // N x K, column k is the beamformer of user k
  RVec q_dl;   // N
  RVec q_ul;   // M
  double lambda = 0.0;
  RVec mu;     // K
  double objective = 0.0;  // Tr(R)
  bool early_exit = false;
  double scale = 1.0;      // power scale applied by the separated design
  SolveTrace trace;
};

// ---------------------------------------------------------------------------
// Evaluators
// ---------------------------------------------------------------------------

inline void require_beams(const ProblemInstance& inst, const CMat& w) {
  if (w.rows() != inst.tx_total() || w.cols() != inst.users())
    throw DomainError("beamformer matrix must be N x K");
}

/// R = sum_k w_k w_k^H + diag(q_dl)
inline CMat transmit_covariance(const CMat& w, const RVec& q_dl) {
  if (q_dl.size() != w.rows()) throw DomainError("q_dl must have one entry per transmit antenna");
  CMat R = w * w.adjoint();
  R.diagonal() += q_dl.cast<cd>();
  return hermitian_part(R);
}

/// a_t^H Sigma_g R Sigma_g^H a_t, the power delivered toward the target.
inline double target_illumination(const ProblemInstance& inst, const CMat& R) {
  if (R.rows() != inst.tx_total() || R.cols() != inst.tx_total())
    throw DomainError("transmit covariance must be N x N");
  const CVec v = inst.sigma_diag().conjugate().cwiseProduct(inst.a_t());  // Sigma^H a
  return quad_form(v, hermitian_part(R));
}

/// SINR of user k with the DL compression noise q_dl.
inline double comm_sinr(const ProblemInstance& inst, const CMat& w, const RVec& q_dl, int k) {
  require_beams(inst, w);
  if (k < 0 || k >= inst.users()) throw DomainError("user index out of range");
  if (q_dl.size() != inst.tx_total()) throw DomainError("q_dl must have length N");
  if ((q_dl.array() < 0.0).any()) throw DomainError("compression noise must be nonnegative");
  const CVec& hk = inst.h(k);
  const Eigen::RowVectorXcd proj = hk.adjoint() * w;  // h_k^H w_i
  const RVec p2 = proj.cwiseAbs2().transpose();
  const double signal = p2(k);
  const double interference = p2.sum() - signal;
  const double compression = hk.cwiseAbs2().dot(q_dl);
  return signal / (interference + compression + inst.sigma_v2());
}

/// DL fronthaul rate of antenna n. 0/0 is defined as 0.
inline double dl_rate(const CMat& w, const RVec& q_dl, int n) {
  if (n < 0 || n >= w.rows() || q_dl.size() != w.rows()) throw DomainError("antenna index out of range");
  const double signal = w.row(n).squaredNorm();
  const double q = q_dl(n);
  if (q < 0.0) throw DomainError("compression noise must be nonnegative");
  if (signal == 0.0) return 0.0;
  if (q == 0.0) throw DomainError("DL antenna carries signal without compression noise: infinite fronthaul rate");
  return std::log2(1.0 + signal / q);
}

/// UL fronthaul rate of receive antenna m.
inline double ul_rate(const ProblemInstance& inst, const CMat& R, const RVec& q_ul, int m) {
  if (m < 0 || m >= inst.rx_antennas() || q_ul.size() != inst.rx_antennas())
    throw DomainError("receive antenna index out of range");
  if (!(q_ul(m) > 0.0)) throw DomainError("UL compression noise must be positive");
  const double M = inst.rx_antennas();
  const double num = target_illumination(inst, R) + M * inst.sigma_z2();
  return std::log2(1.0 + num / (M * q_ul(m)));
}

/// Sensing SINR after the MVDR receive filter.
inline double sensing_sinr(const ProblemInstance& inst, const CMat& R, const RVec& q_ul) {
  if (q_ul.size() != inst.rx_antennas()) throw DomainError("q_ul must have length M");
  if ((q_ul.array() < 0.0).any()) throw DomainError("compression noise must be nonnegative");
  const RVec inv = (q_ul.array() + inst.sigma_z2()).inverse().matrix();
  const double filter_gain = inst.a_r().cwiseAbs2().dot(inv);  // a_r^H (Q + s I)^{-1} a_r
  return target_illumination(inst, R) * filter_gain;
}

/// UL compression noise that makes every UL fronthaul constraint tight.
inline RVec optimal_q_ul(const ProblemInstance& inst, const CMat& R) {
  const double M = inst.rx_antennas();
  const double q = inst.beta() / M * target_illumination(inst, R) + inst.beta() * inst.sigma_z2();
  return RVec::Constant(inst.rx_antennas(), q);
}

/// DL compression noise q_n = alpha * sum_k |w_k[n]|^2.
inline RVec optimal_q_dl(const ProblemInstance& inst, const CMat& w) {
  require_beams(inst, w);
  return (inst.alpha() * w.rowwise().squaredNorm()).eval();
}

/// Fills q_dl, q_ul and the objective of `sol` from its beamformers.
inline void complete_solution(const ProblemInstance& inst, Solution& sol) {
  sol.q_dl = optimal_q_dl(inst, sol.w);
  const CMat R = transmit_covariance(sol.w, sol.q_dl);
  sol.q_ul = optimal_q_ul(inst, R);
  sol.objective = sol.w.squaredNorm() + sol.q_dl.sum();
}

struct FeasibilityReport {
  RVec comm_sinr_slack;  // SINR_k - Gamma_k
  double sensing_slack = 0.0;
  RVec dl_rate_slack;    // C_dl/B - R_n^dl
  RVec ul_rate_slack;    // C_ul/B - R_m^ul
  double tolerance = 0.0;
  bool feasible = false;

  double min_slack() const {
    double m = sensing_slack;
    if (comm_sinr_slack.size()) m = std::min(m, comm_sinr_slack.minCoeff());
    if (dl_rate_slack.size()) m = std::min(m, dl_rate_slack.minCoeff());
    if (ul_rate_slack.size()) m = std::min(m, ul_rate_slack.minCoeff());
    return m;
  }
};

inline FeasibilityReport check_feasibility(const ProblemInstance& inst, const CMat& w, const RVec& q_dl,
                                           const RVec& q_ul, double tol) {
  require_beams(inst, w);
  if (q_dl.size() != inst.tx_total()) throw DomainError("q_dl must have length N");
  if (q_ul.size() != inst.rx_antennas()) throw DomainError("q_ul must have length M");

  FeasibilityReport rep;
  rep.tolerance = tol;
  rep.comm_sinr_slack.resize(inst.users());
  for (int k = 0; k < inst.users(); ++k) rep.comm_sinr_slack(k) = comm_sinr(inst, w, q_dl, k) - inst.gamma(k);

  const CMat R = transmit_covariance(w, q_dl);
  rep.sensing_slack = sensing_sinr(inst, R, q_ul) - inst.gamma_s();

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  rep.dl_rate_slack.resize(inst.tx_total());
  for (int n = 0; n < inst.tx_total(); ++n) {
    try {
      rep.dl_rate_slack(n) = inst.dl_capacity() - dl_rate(w, q_dl, n);
    } catch (const DomainError&) {
      rep.dl_rate_slack(n) = std::isinf(inst.dl_capacity()) ? -kNegInf : kNegInf;
    }
  }
  rep.ul_rate_slack.resize(inst.rx_antennas());
  for (int m = 0; m < inst.rx_antennas(); ++m) {
    try {
      rep.ul_rate_slack(m) = inst.ul_capacity() - ul_rate(inst, R, q_ul, m);
    } catch (const DomainError&) {
      rep.ul_rate_slack(m) = std::isinf(inst.ul_capacity()) ? -kNegInf : kNegInf;
    }
  }
  // Slacks are compared relative to their targets (floored at 1). Unlimited
  // fronthaul (alpha or beta = 0) admits any rate, including the unbounded rate
  // of an antenna that carries signal without compression noise.
  auto ok = [tol](double slack, double target) { return slack >= -tol * std::max(1.0, std::abs(target)); };
  rep.feasible = ok(rep.sensing_slack, inst.gamma_s());
  for (int k = 0; k < inst.users(); ++k) rep.feasible = rep.feasible && ok(rep.comm_sinr_slack(k), inst.gamma(k));
  for (int n = 0; n < inst.tx_total(); ++n) rep.feasible = rep.feasible && ok(rep.dl_rate_slack(n), inst.dl_capacity());
  for (int m = 0; m < inst.rx_antennas(); ++m) rep.feasible = rep.feasible && ok(rep.ul_rate_slack(m), inst.ul_capacity());
  return rep;
}

inline FeasibilityReport check_feasibility(const ProblemInstance& inst, const Solution& sol, double tol) {
  return check_feasibility(inst, sol.w, sol.q_dl, sol.q_ul, tol);
}

/// sum_k w_k^H B w_k
inline double beam_target_gain(const ProblemInstance& inst, const CMat& w) {
  return (w.adjoint() * inst.B() * w).trace().real();
}

}  // namespace jfcbd
