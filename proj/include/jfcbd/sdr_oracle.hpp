// SPDX-License-Identifier: Apache-2.0
//
// Semidefinite relaxation of the beamforming problem, solved to certified
// optimality with the in-repo interior-point method. The optimal value is a
// lower bound on the power of any feasible beamformer set; a feasible
// rank-one point attaining it is globally optimal.
//
//   minimize    (1 + alpha) sum_k Tr(W_k)
//   subject to  Gamma~_k Tr(W_k H_k) - sum_i Tr(W_i A_k) >= sigma_v^2   (each k)
//               sum_k Tr(W_k B) >= Gamma~_s
//               W_k >= 0
//
// Each Hermitian W (N x N) is handled as the real symmetric 2N x 2N matrix
// [[Re W, -Im W], [Im W, Re W]], for which Tr(C W) = Tr(emb(C) emb(W)) / 2.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "jfcbd/linalg.hpp"
#include "jfcbd/model.hpp"
#include "jfcbd/pd_solver.hpp"
#include "jfcbd/sdp.hpp"
#include "jfcbd/trace.hpp"

namespace jfcbd {

/// Real symmetric embedding of a Hermitian matrix.
inline RMat embed_hermitian(const CMat& h) {
  const Eigen::Index n = h.rows();
  const CMat hh = hermitian_part(h);
  RMat r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = hh.real();
  r.topRightCorner(n, n) = -hh.imag();
  r.bottomLeftCorner(n, n) = hh.imag();
  r.bottomRightCorner(n, n) = hh.real();
  return r;
}

/// Inverse of embed_hermitian; averages the redundant blocks.
inline CMat extract_hermitian(const RMat& r) {
  if (r.rows() != r.cols() || r.rows() % 2 != 0) throw DomainError("embedded matrix must be square with even size");
  const Eigen::Index n = r.rows() / 2;
  const RMat re = 0.5 * (r.topLeftCorner(n, n) + r.bottomRightCorner(n, n));
  const RMat im = 0.5 * (r.bottomLeftCorner(n, n) - r.topRightCorner(n, n));
  CMat h(n, n);
  h.real() = re;
  h.imag() = im;
  return hermitian_part(h);
}

/// Complex data of the relaxation.
struct SdpProblem {
  int dim = 0;    // N
  int users = 0;  // K
  double objective_scale = 1.0;               // 1 + alpha
  std::vector<std::vector<CMat>> comm;        // comm[k][j]: coefficient of W_j in user k's constraint
  RVec comm_rhs;                              // sigma_v^2 per user
  CMat sensing;                               // B
  double sensing_rhs = 0.0;                   // Gamma~_s

  int variables() const { return users; }
  int constraints() const { return users + 1; }
};

inline SdpProblem assemble_sdp(const ProblemInstance& inst) {
  SdpProblem p;
  p.dim = inst.tx_total();
  p.users = inst.users();
  p.objective_scale = 1.0 + inst.alpha();
  p.comm.resize(p.users);
  for (int k = 0; k < p.users; ++k) {
    for (int j = 0; j < p.users; ++j) {
      CMat c = -inst.A(k);
      if (j == k) c += inst.gamma_tilde(k) * inst.H(k);
      p.comm[k].push_back(hermitian_part(c));
    }
  }
  p.comm_rhs = RVec::Constant(p.users, inst.sigma_v2());
  p.sensing = inst.B();
  p.sensing_rhs = inst.gamma_tilde_s();
  return p;
}

/// Left-hand sides of the K communication rows followed by the sensing row.
inline RVec constraint_values(const SdpProblem& p, const std::vector<CMat>& W) {
  if (static_cast<int>(W.size()) != p.users) throw DomainError("need one matrix variable per user");
  RVec v = RVec::Zero(p.constraints());
  for (int k = 0; k < p.users; ++k)
    for (int j = 0; j < p.users; ++j) v(k) += (p.comm[k][j] * W[j]).trace().real();
  for (int j = 0; j < p.users; ++j) v(p.users) += (p.sensing * W[j]).trace().real();
  return v;
}

inline double objective_value(const SdpProblem& p, const std::vector<CMat>& W) {
  double s = 0.0;
  for (const auto& w : W) s += w.trace().real();
  return p.objective_scale * s;
}

/// Rank-one lift W_k = w_k w_k^H of a beamformer matrix.
inline std::vector<CMat> lift(const CMat& w) {
  std::vector<CMat> W;
  for (Eigen::Index k = 0; k < w.cols(); ++k) W.push_back(w.col(k) * w.col(k).adjoint());
  return W;
}

struct SdpOptions {
  /// Required |primal - dual| / max(1, primal), in watts.
  double tol = 1e-8;
  int max_iter = 150;
};

struct SdpSolution {
  sdp::Status status = sdp::Status::NumericalFailure;
  std::vector<CMat> W;
  double primal_value = 0.0;  // W
  double dual_value = 0.0;    // W
  double gap = 0.0;           // |primal - dual| / primal
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  double solve_time_s = 0.0;
  /// Second over first eigenvalue of each W_k (0 for exactly rank one).
  std::vector<double> eigen_ratio;
  /// Smallest eigenvalue of each W_k relative to its trace.
  std::vector<double> min_eigen_ratio;

  bool optimal() const { return status == sdp::Status::Optimal; }
};

namespace detail {

/// Variable scale: a power level at which both requirement families are O(1).
inline double sdp_variable_scale(const SdpProblem& p) {
  double s = 0.0;
  const double bmax = hermitian_eigenvalues(p.sensing).maxCoeff();
  if (p.sensing_rhs > 0.0 && bmax > 0.0) s = p.sensing_rhs / bmax;
  for (int k = 0; k < p.users; ++k) {
    const double gain = hermitian_eigenvalues(p.comm[k][k]).maxCoeff();
    if (gain > 0.0) s = std::max(s, p.comm_rhs(k) / gain);
  }
  return s > 0.0 ? s : 1.0;
}

}  // namespace detail

/// Scaled real standard-form data. Blocks: K embedded variables of size 2N,
/// then K + 1 scalar surplus variables. Rows are divided by their right-hand
/// side (when nonzero) and the variables by `scale`.
struct RealSdp {
  sdp::Problem problem;
  double scale = 1.0;            // W = scale * extract(X)
  double objective_factor = 1.0; // original objective = objective_factor * scaled objective
  RVec row_scale;                // original row = row_scale * scaled row
};

inline RealSdp to_real_sdp(const SdpProblem& p) {
  RealSdp r;
  r.scale = detail::sdp_variable_scale(p);
  r.objective_factor = r.scale * p.objective_scale;
  const int K = p.users;
  const int m = p.constraints();
  const int n2 = 2 * p.dim;

  r.problem.c.assign(2 * K + 1, RMat());
  for (int j = 0; j < K; ++j) r.problem.c[j] = 0.5 * RMat::Identity(n2, n2);
  for (int j = K; j < 2 * K + 1; ++j) r.problem.c[j] = RMat::Zero(1, 1);

  r.row_scale.resize(m);
  r.problem.b.resize(m);
  r.problem.a.assign(m, std::vector<RMat>(2 * K + 1));
  for (int i = 0; i < m; ++i) {
    const double rhs = i < K ? p.comm_rhs(i) : p.sensing_rhs;
    r.row_scale(i) = rhs > 0.0 ? rhs : 1.0;
    r.problem.b(i) = rhs / r.row_scale(i);
    const double f = r.scale / r.row_scale(i);
    for (int j = 0; j < K; ++j) {
      const CMat& coef = i < K ? p.comm[i][j] : p.sensing;
      r.problem.a[i][j] = 0.5 * f * embed_hermitian(coef);
    }
    r.problem.a[i][K + i] = -RMat::Identity(1, 1);
  }
  return r;
}

inline SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opt = {}) {
  Stopwatch clock;
  const RealSdp real = to_real_sdp(p);
  sdp::Options so;
  so.max_iter = opt.max_iter;
  // Internal tolerances are relative to the scaled data (O(1)).
  so.tol = std::clamp(0.01 * opt.tol, 1e-12, 1e-6);
  so.feasibility_tol = std::max(so.tol, 1e-8);
  const sdp::Result r = sdp::solve(real.problem, so);

  SdpSolution out;
  out.status = r.status;
  out.iterations = r.iterations;
  out.primal_infeasibility = r.primal_infeasibility;
  out.dual_infeasibility = r.dual_infeasibility;
  out.primal_value = real.objective_factor * r.primal_objective;
  out.dual_value = real.objective_factor * r.dual_objective;
  out.gap = std::abs(out.primal_value - out.dual_value) / std::abs(out.primal_value);
  for (int j = 0; j < p.users; ++j) {
    CMat W = real.scale * extract_hermitian(r.x[j]);
    const RVec ev = hermitian_eigenvalues(W);  // ascending
    const double top = ev(ev.size() - 1);
    out.eigen_ratio.push_back(ev.size() > 1 && top > 0.0 ? ev(ev.size() - 2) / top : 0.0);
    const double tr = W.trace().real();
    out.min_eigen_ratio.push_back(tr > 0.0 ? ev(0) / tr : 0.0);
    out.W.push_back(std::move(W));
  }
  if (out.status == sdp::Status::Optimal && out.gap > opt.tol) out.status = sdp::Status::NumericalFailure;
  out.solve_time_s = clock.seconds();
  return out;
}

inline SdpSolution solve_sdp(const ProblemInstance& inst, const SdpOptions& opt = {}) {
  return solve_sdp(assemble_sdp(inst), opt);
}

/// Diagnostic rank-one point: principal eigenvectors of the W_k as
/// directions, powers from the tight communication system, then a uniform
/// power scale if the sensing requirement is not met.
inline Solution extract_rank_one(const ProblemInstance& inst, const SdpSolution& sol) {
  if (static_cast<int>(sol.W.size()) != inst.users()) throw DomainError("SDP solution does not match the instance");
  CMat dirs(inst.tx_total(), inst.users());
  CMat fallback(inst.tx_total(), inst.users());
  for (int k = 0; k < inst.users(); ++k) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(sol.W[k]));
    const Eigen::Index top = es.eigenvalues().size() - 1;
    dirs.col(k) = es.eigenvectors().col(top);
    fallback.col(k) = std::sqrt(std::max(0.0, es.eigenvalues()(top))) * dirs.col(k);
  }
  Solution out;
  out.method = "sdr";
  if (const auto p = solve_power(inst, dirs))
    out.w = dirs * p->cwiseSqrt().asDiagonal();
  else
    out.w = fallback;
  const double gain = beam_target_gain(inst, out.w);
  if (gain > 0.0 && gain < inst.gamma_tilde_s()) {
    out.scale = inst.gamma_tilde_s() / gain;
    out.w *= std::sqrt(out.scale);
  }
  complete_solution(inst, out);
  return out;
}

struct CertificateReport {
  double pd_objective = 0.0;
  double sdp_value = 0.0;
  /// (PD objective - SDP value) / SDP value; nonnegative up to solver accuracy.
  double relative_gap = 0.0;
  bool pd_feasible = false;
  double pd_min_slack = 0.0;
  bool sdp_optimal = false;
  double sdp_gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// A feasible rank-one point whose power matches the relaxation's optimum
/// within `tol` (relative) is globally optimal.
inline CertificateReport certify(const ProblemInstance& inst, const Solution& pd, const SdpSolution& sdp,
                                 double tol, double feasibility_tol = 1e-6) {
  CertificateReport rep;
  rep.tolerance = tol;
  const FeasibilityReport feas = check_feasibility(inst, pd, feasibility_tol);
  rep.pd_feasible = feas.feasible;
  rep.pd_min_slack = feas.min_slack();
  rep.pd_objective = pd.w.squaredNorm() + pd.q_dl.sum();
  rep.sdp_value = sdp.primal_value;
  rep.sdp_optimal = sdp.optimal();
  rep.sdp_gap = sdp.gap;
  rep.relative_gap = sdp.primal_value > 0.0 ? (rep.pd_objective - sdp.primal_value) / sdp.primal_value
                                            : std::numeric_limits<double>::infinity();
  rep.pass = rep.sdp_optimal && rep.pd_feasible && std::abs(rep.relative_gap) <= tol;
  return rep;
}

}  // namespace jfcbd
