// SPDX-License-Identifier: Apache-2.0
//
// Primal-dual solver for minimum-power joint fronthaul compression and
// beamforming.
//
// Outer loop: bisection on the sensing dual variable lambda, driven by the
// subgradient  Delta(lambda) = Gamma~_s - sum_k w_k^H B w_k.
// Inner loop (fixed lambda): fixed-point iteration on the user duals
//     mu_k <- 1 / (Gamma~_k h_k^H C(lambda, mu)^{-1} h_k),
//     C(lambda, mu) = I - lambda B + sum_i mu_i A_i,
// followed by MVDR directions C^{-1} h_k / ||C^{-1} h_k|| and the power
// vector p = sigma_v^2 S^{-1} 1 that makes every communication constraint
// tight.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jfcbd/linalg.hpp"
#include "jfcbd/model.hpp"
#include "jfcbd/trace.hpp"

namespace jfcbd {

/// Communication constraints cannot be met (the lambda = 0 problem has no solution).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver gave up without converging. Carries the trace collected so far.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, SolveTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const SolveTrace& trace() const { return trace_; }

 private:
  SolveTrace trace_;
};

struct PdOptions {
  double fixed_point_tol = 1e-10;
  int fixed_point_max_iter = 10000;
  /// After an iteration cap the inner solve restarts the fixed point from its
  /// last iterate (still an admissible start, by monotonicity) up to this many times.
  int fixed_point_restarts = 30;
  /// Doublings of the uniform descending start before declaring dual infeasibility.
  int start_doublings = 60;
  /// Stop when -bisection_tol * Gamma~_s <= Delta(lambda) <= 0.
  double bisection_tol = 1e-6;
  /// Give up when the bracket is narrower than bracket_tol * lambda_max.
  double bracket_tol = 1e-14;
  int max_bisection = 200;
  FixedPointMode mode = FixedPointMode::Descending;
  bool record_iterates = false;
};

// ---------------------------------------------------------------------------
// Lambda range analysis
// ---------------------------------------------------------------------------

enum class LambdaCase {
  Psd,         // I - lambda B is PSD
  Nsd,         // I - lambda B is NSD
  Indefinite,  // neither
};

inline const char* to_string(LambdaCase c) {
  switch (c) {
    case LambdaCase::Psd: return "psd";
    case LambdaCase::Nsd: return "nsd";
    case LambdaCase::Indefinite: return "indefinite";
  }
  return "unknown";
}

struct LambdaClass {
  LambdaCase label = LambdaCase::Psd;
  double psd_upper = 0.0;  // N_t / ((alpha + N) max |g|^2)
  double nsd_lower = 0.0;  // N_t / (alpha min |g|^2), +inf when alpha = 0
  double min_eig = 0.0;    // of I - lambda B
  double max_eig = 0.0;
  /// Eigenvalue signs agree with the interval label (within 1e-10).
  bool consistent = true;
};

inline double psd_upper_bound(const ProblemInstance& inst) {
  return inst.tx_antennas() / ((inst.alpha() + inst.tx_total()) * inst.max_gain2());
}

inline double nsd_lower_bound(const ProblemInstance& inst) {
  if (inst.alpha() == 0.0) return std::numeric_limits<double>::infinity();
  return inst.tx_antennas() / (inst.alpha() * inst.min_gain2());
}

inline LambdaClass classify_lambda(const ProblemInstance& inst, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
  LambdaClass c;
  c.psd_upper = psd_upper_bound(inst);
  c.nsd_lower = nsd_lower_bound(inst);
  if (lambda <= c.psd_upper)
    c.label = LambdaCase::Psd;
  else if (lambda >= c.nsd_lower)
    c.label = LambdaCase::Nsd;
  else
    c.label = LambdaCase::Indefinite;

  CMat m = -lambda * inst.B();
  m.diagonal().array() += 1.0;
  const RVec ev = hermitian_eigenvalues(m);
  c.min_eig = ev.minCoeff();
  c.max_eig = ev.maxCoeff();
  constexpr double kTol = 1e-10;
  if (c.label == LambdaCase::Psd) c.consistent = c.min_eig >= -kTol;
  if (c.label == LambdaCase::Nsd) c.consistent = c.max_eig <= kTol;
  return c;
}

// ---------------------------------------------------------------------------
// Dual building blocks
// ---------------------------------------------------------------------------

/// C(lambda, mu) = I - lambda B + sum_i mu_i A_i
inline CMat dual_matrix(const ProblemInstance& inst, double lambda, const RVec& mu) {
  CMat c = -lambda * inst.B();
  c.diagonal().array() += 1.0;
  for (int i = 0; i < inst.users(); ++i) c += mu(i) * inst.A(i);
  return hermitian_part(c);
}

/// State of the dual variables at a fixed lambda.
struct DualState {
  double lambda = 0.0;
  RVec mu;
  LambdaCase case_label = LambdaCase::Psd;
  CMat C;
};

namespace detail {

/// Repeated evaluation of h_k^H C^{-1} h_k at a fixed lambda.
///
/// C(lambda, mu) = D + sum_k mu_k h_k h_k^H - lambda b b^H with b = Sigma^H a_t
/// and the diagonal D = I - lambda alpha / N_t |Sigma|^2 + alpha diag(|Hs|^2 mu).
/// While D > 0 the work is done on the (K+1)-dimensional capacitance matrix
/// M = J + U^H D^{-1} U, U = [sqrt(mu_k) h_k, sqrt(lambda) b], J = diag(1, .., 1, -1):
/// C > 0 exactly when M has one negative eigenvalue (none when lambda = 0),
/// and mu_k h_k^H C^{-1} h_k = 1 - [M^{-1}]_kk. Otherwise C is assembled and
/// factored densely.
class DualEvaluator {
 public:
  DualEvaluator(const ProblemInstance& inst, double lambda)
      : lambda_(lambda),
        alpha_(inst.alpha()),
        users_(inst.users()),
        x_(inst.tx_total(), inst.users() + 1),
        habs2_(inst.tx_total(), inst.users()),
        d0_(inst.tx_total()),
        gains_(inst.users()) {
    for (int k = 0; k < users_; ++k) x_.col(k) = inst.h(k);
    x_.col(users_) = inst.sigma_diag().conjugate().cwiseProduct(inst.a_t());
    habs2_ = x_.leftCols(users_).cwiseAbs2();
    d0_ = RVec::Ones(inst.tx_total()) - (lambda * inst.alpha() / inst.tx_antennas()) * inst.sigma_diag().cwiseAbs2();
    base_ = -lambda * inst.B();
    base_.diagonal().array() += 1.0;
  }

  /// Prepares C(lambda, mu); false when C is not positive definite.
  bool factor(const RVec& mu) {
    mu_ = mu;
    d_ = d0_;
    if (alpha_ != 0.0) d_.noalias() += alpha_ * (habs2_ * mu);
    dense_ = !((d_.array() > 0.0).all() && d_.allFinite());
    return dense_ ? factor_dense() : factor_capacitance();
  }

  /// h_k^H C^{-1} h_k for every user; valid after a successful factor().
  const RVec& gains() {
    if (dense_) {
      for (int k = 0; k < users_; ++k) {
        y_ = x_.col(k);
        l_.triangularView<Eigen::Lower>().solveInPlace(y_);
        gains_(k) = y_.squaredNorm();
      }
      return gains_;
    }
    for (int k = 0; k < users_; ++k) {
      if (mu_(k) > 0.0) {
        gains_(k) = (1.0 - minv_(k, k).real()) / mu_(k);
      } else {
        const CVec v = t_.cwiseProduct(q_.col(k));
        gains_(k) = q_(k, k).real() - v.dot(minv_ * v).real();
      }
    }
    return gains_;
  }

  /// Dense Cholesky of C; false when it fails.
  bool factor_dense() {
    l_ = base_;
    for (int k = 0; k < users_; ++k) l_.noalias() += mu_(k) * x_.col(k) * x_.col(k).adjoint();
    if (alpha_ != 0.0) l_.diagonal().real() += alpha_ * (habs2_ * mu_);
    dense_ = true;
    if (Eigen::internal::llt_inplace<cd, Eigen::Lower>::blocked(l_) != -1) return false;
    for (Eigen::Index i = 0; i < l_.rows(); ++i) {
      const double d = l_(i, i).real();
      if (!(d > 0.0) || !std::isfinite(d)) return false;
    }
    return true;
  }

 private:
  bool factor_capacitance() {
    const int K = users_;
    q_.noalias() = x_.adjoint() * d_.cwiseInverse().asDiagonal() * x_;
    t_.resize(K + 1);
    for (int k = 0; k < K; ++k) t_(k) = std::sqrt(mu_(k));
    t_(K) = std::sqrt(lambda_);
    const CMat g = t_.asDiagonal() * q_ * t_.asDiagonal();

    CMat p = g.topLeftCorner(K, K);
    p.diagonal().array() += 1.0;
    Eigen::LLT<CMat> llt(p);
    if (!cholesky_succeeded(llt)) return false;
    minv_.setZero(K + 1, K + 1);
    minv_.topLeftCorner(K, K) = llt.solve(CMat::Identity(K, K));
    if (lambda_ > 0.0) {
      const CVec c = g.topRightCorner(K, 1);
      const CVec pc = llt.solve(c);
      const double s = g(K, K).real() - 1.0 - c.dot(pc).real();
      if (!(s < 0.0) || !std::isfinite(s)) return false;
      minv_.topLeftCorner(K, K).noalias() += pc * pc.adjoint() / s;
      minv_.topRightCorner(K, 1) = -pc / s;
      minv_.bottomLeftCorner(1, K) = -pc.adjoint() / s;
      minv_(K, K) = 1.0 / s;
    }
    return minv_.allFinite();
  }

  double lambda_;
  double alpha_;
  int users_;
  CMat x_;      // [h_1 .. h_K, b]
  RMat habs2_;
  RVec d0_, d_;
  RVec mu_;
  bool dense_ = false;
  CMat q_;      // X^H D^{-1} X
  CVec t_;
  CMat minv_;
  CMat base_;
  CMat l_;
  CVec y_;
  RVec gains_;
};

inline double step_residual(const RVec& next, const RVec& prev) {
  double r = 0.0;
  for (Eigen::Index k = 0; k < next.size(); ++k)
    r = std::max(r, std::abs(next(k) - prev(k)) / std::max(1.0, std::abs(next(k))));
  return r;
}

/// Contraction ratio observed over the last window of steps (0 when unknown).
inline double contraction_estimate(const std::vector<double>& hist) {
  constexpr std::size_t kWindow = 8;
  if (hist.size() <= kWindow) return 0.0;
  const double prev = hist[hist.size() - 1 - kWindow];
  if (!(prev > 0.0)) return 0.0;
  return std::pow(hist.back() / prev, 1.0 / kWindow);
}

/// Distance-to-fixed-point test on a residual history whose last entry is <= tol.
/// rho_floor is a lower bound on the contraction ratio known from elsewhere.
inline bool settled(const std::vector<double>& hist, double tol, double rho_floor = 0.0) {
  constexpr double kFloor = 1e-15;
  const double r = hist.back();
  if (r <= kFloor) return true;
  if (hist.size() <= 8 && rho_floor <= 0.0) return false;
  const double rho = std::max(contraction_estimate(hist), rho_floor);
  if (!(rho < 1.0)) return false;
  return r * rho / (1.0 - rho) <= tol;
}

}  // namespace detail

/// f_k(lambda, mu) = mu_k h_k^H C^{-1} h_k; nullopt when C is not positive definite.
inline std::optional<RVec> dual_constraint_values(const ProblemInstance& inst, double lambda, const RVec& mu) {
  detail::DualEvaluator ev(inst, lambda);
  if (!ev.factor(mu)) return std::nullopt;
  return mu.cwiseProduct(ev.gains()).eval();
}

/// Whether mu is an admissible start for `mode` at this lambda.
inline bool is_valid_start(const ProblemInstance& inst, double lambda, const RVec& mu, FixedPointMode mode) {
  if (mu.size() != inst.users() || (mu.array() < 0.0).any()) return false;
  const auto f = dual_constraint_values(inst, lambda, mu);
  if (!f) return false;
  for (int k = 0; k < inst.users(); ++k) {
    const double target = 1.0 / inst.gamma_tilde(k);
    if (mode == FixedPointMode::Descending && (*f)(k) < target) return false;
    if (mode == FixedPointMode::Ascending && (*f)(k) > target) return false;
  }
  return true;
}

struct FixedPointResult {
  InnerStatus status = InnerStatus::Converged;
  RVec mu;
  int iterations = 0;
  /// Contraction ratio over the final steps.
  double rho = 0.0;
  InnerSolveRecord record;
};

/// Fixed-point iteration on mu at a given lambda from an admissible start.
///
/// With r_t = max_k |mu_k^(t) - mu_k^(t-1)| / max(1, mu_k^(t)) and rho the
/// contraction ratio observed over the last few steps, the iteration stops
/// once r_t <= tol and r_t * rho / (1 - rho) <= tol, i.e. when the distance
/// to the fixed point (not only the last step) is below tol. Steps at the
/// round-off floor also stop it. Loss of positive definiteness of C at any
/// iterate is reported as DualInfeasible.
inline FixedPointResult fixed_point_mu(const ProblemInstance& inst, double lambda, const RVec& mu0,
                                       FixedPointMode mode, const PdOptions& opt = {}, double rho_floor = 0.0) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
  if (mu0.size() != inst.users()) throw DomainError("mu0 must have one entry per user");
  if (!is_valid_start(inst, lambda, mu0, mode))
    throw DomainError(std::string("mu0 violates the ") + to_string(mode) + " start condition");

  FixedPointResult res;
  res.record.lambda = lambda;
  res.record.mode = mode;
  if (opt.record_iterates) res.record.iterates.push_back(mu0);

  detail::DualEvaluator ev(inst, lambda);
  RVec mu = mu0;
  RVec next(inst.users());
  auto finish = [&](InnerStatus s) {
    res.status = s;
    res.mu = mu;
    res.record.status = s;
    res.record.iterations = res.iterations;
    res.rho = detail::contraction_estimate(res.record.residuals);
    return res;
  };

  for (int t = 0; t < opt.fixed_point_max_iter; ++t) {
    if (!ev.factor(mu)) return finish(InnerStatus::DualInfeasible);
    const RVec& gains = ev.gains();
    if (!(gains.array() > 0.0).all()) return finish(InnerStatus::DualInfeasible);
    next = inst.gamma_tilde().cwiseProduct(gains).cwiseInverse();

    const double r = detail::step_residual(next, mu);
    mu.swap(next);
    ++res.iterations;
    auto& hist = res.record.residuals;
    hist.push_back(r);
    if (opt.record_iterates) res.record.iterates.push_back(mu);

    if (r <= opt.fixed_point_tol && detail::settled(hist, opt.fixed_point_tol, rho_floor)) {
      // The accepted point must itself admit a Cholesky factorization of C(lambda, mu*).
      if (!ev.factor(mu) || !ev.factor_dense()) return finish(InnerStatus::DualInfeasible);
      return finish(InnerStatus::Converged);
    }
  }
  return finish(InnerStatus::IterationCap);
}

/// Unit-norm MVDR directions C^{-1} h_k / ||C^{-1} h_k||, as columns.
inline CMat mvdr_direction(const ProblemInstance& inst, double lambda, const RVec& mu) {
  const auto llt = try_cholesky(dual_matrix(inst, lambda, mu));
  if (!llt) throw DomainError("C(lambda, mu) is not positive definite");
  CMat dirs(inst.tx_total(), inst.users());
  for (int k = 0; k < inst.users(); ++k) {
    CVec v = llt->solve(inst.h(k));
    dirs.col(k) = v / v.norm();
  }
  return dirs;
}

/// S matrix of the power system S p = sigma_v^2 1.
inline RMat power_matrix(const ProblemInstance& inst, const CMat& directions) {
  const int K = inst.users();
  RMat S(K, K);
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < K; ++i) {
      const CVec d = directions.col(i);
      S(k, i) = -quad_form(d, inst.A(k));
    }
    S(k, k) += inst.gamma_tilde(k) * quad_form(directions.col(k), inst.H(k));
  }
  return S;
}

/// Powers that make all communication constraints tight for the given
/// directions, or nullopt when S is singular or a power is not positive.
inline std::optional<RVec> solve_power(const ProblemInstance& inst, const CMat& directions) {
  if (directions.rows() != inst.tx_total() || directions.cols() != inst.users())
    throw DomainError("direction matrix must be N x K");
  const RMat S = power_matrix(inst, directions);
  Eigen::FullPivLU<RMat> lu(S);
  if (!lu.isInvertible()) return std::nullopt;
  const RVec p = lu.solve(RVec::Constant(inst.users(), inst.sigma_v2()));
  for (Eigen::Index k = 0; k < p.size(); ++k)
    if (!(p(k) > 0.0) || !std::isfinite(p(k))) return std::nullopt;
  return p;
}

/// Delta(lambda) = Gamma~_s - sum_k w_k^H B w_k
inline double subgradient(const ProblemInstance& inst, const CMat& w) {
  require_beams(inst, w);
  return inst.gamma_tilde_s() - beam_target_gain(inst, w);
}

/// Result of solving the inner problem at one lambda.
struct InnerSolution {
  InnerStatus status = InnerStatus::Converged;
  DualState dual;
  CMat w;  // valid when converged
  FixedPointResult fixed_point;
};

/// Uniform descending start mu0 = c * 1: c starts at min_k 1/(Gamma~_k ||h_k||^2)
/// and doubles until the start condition holds.
inline std::optional<RVec> descending_start(const ProblemInstance& inst, double lambda, const PdOptions& opt,
                                            const RVec* warm = nullptr) {
  if (warm && is_valid_start(inst, lambda, *warm, FixedPointMode::Descending)) return *warm;
  double c = std::numeric_limits<double>::infinity();
  for (int k = 0; k < inst.users(); ++k) c = std::min(c, 1.0 / (inst.gamma_tilde(k) * inst.h(k).squaredNorm()));
  for (int j = 0; j <= opt.start_doublings; ++j, c *= 2.0) {
    RVec mu = RVec::Constant(inst.users(), c);
    if (is_valid_start(inst, lambda, mu, FixedPointMode::Descending)) return mu;
  }
  return std::nullopt;
}

/// Inner solve at a fixed lambda from an explicit start point.
inline InnerSolution solve_inner_from(const ProblemInstance& inst, double lambda, const RVec& mu0,
                                      FixedPointMode mode, const PdOptions& opt, double rho_floor = 0.0) {
  InnerSolution out;
  out.dual.lambda = lambda;
  out.fixed_point = fixed_point_mu(inst, lambda, mu0, mode, opt, rho_floor);
  for (int r = 0; r < opt.fixed_point_restarts && out.fixed_point.status == InnerStatus::IterationCap; ++r) {
    if (!is_valid_start(inst, lambda, out.fixed_point.mu, mode)) break;
    FixedPointResult more = fixed_point_mu(inst, lambda, out.fixed_point.mu, mode, opt, rho_floor);
    auto& rec = out.fixed_point.record;
    rec.residuals.insert(rec.residuals.end(), more.record.residuals.begin(), more.record.residuals.end());
    if (opt.record_iterates)
      rec.iterates.insert(rec.iterates.end(), more.record.iterates.begin() + 1, more.record.iterates.end());
    rec.iterations += more.iterations;
    rec.status = more.status;
    out.fixed_point.iterations += more.iterations;
    out.fixed_point.status = more.status;
    out.fixed_point.rho = more.rho;
    out.fixed_point.mu = std::move(more.mu);
  }
  out.status = out.fixed_point.status;
  out.dual.mu = out.fixed_point.mu;
  if (out.status != InnerStatus::Converged) return out;

  out.dual.C = dual_matrix(inst, lambda, out.dual.mu);
  out.dual.case_label = classify_lambda(inst, lambda).label;
  const CMat dirs = mvdr_direction(inst, lambda, out.dual.mu);
  const auto p = solve_power(inst, dirs);
  if (!p) {
    out.status = InnerStatus::DegeneratePower;
    out.fixed_point.record.status = out.status;
    return out;
  }
  out.w = dirs * p->cwiseSqrt().asDiagonal();
  return out;
}

/// Inner solve at a fixed lambda with an automatically constructed start.
/// Descending mode uses the warm start when it is admissible and otherwise a
/// doubled uniform start; at lambda = 0 an ascending run from mu = 0 is the
/// fallback when no descending start exists.
inline InnerSolution solve_inner(const ProblemInstance& inst, double lambda, const PdOptions& opt,
                                 const RVec* warm = nullptr, double rho_floor = 0.0) {
  if (opt.mode == FixedPointMode::Descending) {
    if (auto start = descending_start(inst, lambda, opt, warm))
      return solve_inner_from(inst, lambda, *start, FixedPointMode::Descending, opt, rho_floor);
  } else if (warm && is_valid_start(inst, lambda, *warm, FixedPointMode::Ascending)) {
    return solve_inner_from(inst, lambda, *warm, FixedPointMode::Ascending, opt, rho_floor);
  }
  const RVec zero = RVec::Zero(inst.users());
  if (is_valid_start(inst, lambda, zero, FixedPointMode::Ascending))
    return solve_inner_from(inst, lambda, zero, FixedPointMode::Ascending, opt);

  InnerSolution out;
  out.status = InnerStatus::NoStart;
  out.dual.lambda = lambda;
  out.fixed_point.status = InnerStatus::NoStart;
  out.fixed_point.record.lambda = lambda;
  out.fixed_point.record.mode = opt.mode;
  out.fixed_point.record.status = InnerStatus::NoStart;
  return out;
}

/// Communication-only power minimization (the lambda = 0 inner problem).
/// Returns the beamformers and the optimal user duals.
struct P4Result {
  CMat w;
  RVec mu;
  InnerSolveRecord record;
};

inline P4Result solve_p4(const ProblemInstance& inst, const PdOptions& opt = {}) {
  InnerSolution s = solve_inner(inst, 0.0, opt);
  if (s.status != InnerStatus::Converged) {
    // With a descending run that failed, give the ascending iteration from
    // zero a chance: at lambda = 0 it converges whenever the problem is feasible.
    if (opt.mode == FixedPointMode::Descending && s.fixed_point.record.mode == FixedPointMode::Descending) {
      s = solve_inner_from(inst, 0.0, RVec::Zero(inst.users()), FixedPointMode::Ascending, opt);
    }
  }
  if (s.status != InnerStatus::Converged)
    throw InfeasibleError(std::string("communication constraints cannot be met (fixed point: ") +
                          to_string(s.status) + ")");
  return P4Result{std::move(s.w), std::move(s.dual.mu), std::move(s.fixed_point.record)};
}

/// Full primal-dual solve. Returns beamformers, both compression noise
/// vectors, the duals and the convergence trace.
inline Solution solve_jfcbd(const ProblemInstance& inst, const PdOptions& opt = {}) {
  Stopwatch total;
  Solution sol;
  sol.method = "pd";
  SolveTrace& trace = sol.trace;

  Stopwatch p4_clock;
  P4Result p4 = solve_p4(inst, opt);
  trace.p4_time_s = p4_clock.seconds();
  trace.inner.push_back(p4.record);

  const double gts = inst.gamma_tilde_s();
  const double delta0 = subgradient(inst, p4.w);
  if (delta0 <= 0.0) {
    sol.w = std::move(p4.w);
    sol.mu = std::move(p4.mu);
    sol.lambda = 0.0;
    sol.early_exit = true;
    trace.early_exit = true;
    complete_solution(inst, sol);
    trace.total_time_s = total.seconds();
    return sol;
  }

  Stopwatch bis_clock;
  double lo = 0.0;
  RVec mu_lo = p4.mu;
  // Contraction slows as lambda grows, so the rate seen at lo bounds the rate above it.
  double rho_lo = 0.0;
  // Weak duality: lambda* Gamma~_s <= dual optimum <= power of the scaled P4
  // beamformers, which are feasible.
  const double dual_bound = p4.w.squaredNorm() / beam_target_gain(inst, p4.w) * (1.0 + 1e-9);
  double hi = std::min(nsd_lower_bound(inst), dual_bound);

  auto run = [&](double lambda, int index) {
    Stopwatch step;
    InnerSolution s = solve_inner(inst, lambda, opt, &mu_lo, rho_lo);
    BisectionRecord rec;
    rec.index = index;
    rec.lambda = lambda;
    rec.status = s.status;
    rec.inner_iterations = s.fixed_point.iterations;
    rec.inner_residual = s.fixed_point.record.residuals.empty() ? 0.0 : s.fixed_point.record.residuals.back();
    rec.delta = std::numeric_limits<double>::quiet_NaN();
    if (s.status == InnerStatus::Converged) {
      rec.target_gain = beam_target_gain(inst, s.w);
      rec.delta = gts - rec.target_gain;
    }
    rec.wall_time_s = step.seconds();
    trace.inner.push_back(s.fixed_point.record);
    return std::pair{std::move(s), rec};
  };

  int index = 0;
  if (std::isinf(hi)) {
    // Unlimited DL fronthaul: B may be singular, so the closed-form bracket
    // does not exist. Expand from the PSD boundary until the sensing
    // constraint is met or the inner problem breaks down.
    hi = 2.0 * psd_upper_bound(inst);
    for (int j = 0; j < 200; ++j) {
      auto [s, rec] = run(hi, ++index);
      rec.lambda_min = lo;
      rec.lambda_max = hi;
      trace.bisection.push_back(rec);
      if (s.status != InnerStatus::Converged || rec.delta < 0.0) break;
      lo = hi;
      mu_lo = s.dual.mu;
      rho_lo = std::max(rho_lo, s.fixed_point.rho);
      hi *= 2.0;
    }
  }

  for (int it = 0; it < opt.max_bisection; ++it) {
    const double lambda = 0.5 * (lo + hi);
    auto [s, rec] = run(lambda, ++index);
    if (s.status != InnerStatus::Converged || rec.delta < 0.0) {
      hi = lambda;
    } else {
      lo = lambda;
      mu_lo = s.dual.mu;
      rho_lo = std::max(rho_lo, s.fixed_point.rho);
    }
    rec.lambda_min = lo;
    rec.lambda_max = hi;
    trace.bisection.push_back(rec);

    const bool accepted = s.status == InnerStatus::Converged && rec.delta <= 0.0 && -rec.delta <= opt.bisection_tol * gts;
    if (accepted) {
      sol.w = std::move(s.w);
      sol.mu = std::move(s.dual.mu);
      sol.lambda = lambda;
      complete_solution(inst, sol);
      trace.bisection_time_s = bis_clock.seconds();
      trace.total_time_s = total.seconds();
      return sol;
    }
    if (hi - lo <= opt.bracket_tol * hi) break;
  }
  trace.bisection_time_s = bis_clock.seconds();
  trace.total_time_s = total.seconds();
  throw NumericalError("bisection on the sensing dual stopped without meeting the subgradient tolerance", trace);
}

}  // namespace jfcbd
