// SPDX-License-Identifier: Apache-2.0
//
// Dense primal-dual interior-point solver for real block-diagonal SDPs in
// standard form
//
//   minimize    sum_j <C_j, X_j>
//   subject to  sum_j <A_ij, X_j> = b_i,   i = 1..m
//               X_j >= 0 (PSD)
//
// with dual  maximize b^T y  s.t.  Z_j = C_j - sum_i y_i A_ij >= 0.
//
// Infeasible-start path following with the HKM search direction and a
// Mehrotra predictor-corrector. Intended for small problems: every block is
// dense and the Schur complement is formed explicitly.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "jfcbd/linalg.hpp"

namespace jfcbd::sdp {

struct Problem {
  std::vector<RMat> c;                // objective coefficient per block
  std::vector<std::vector<RMat>> a;   // a[i][j]: constraint i on block j; 0x0 means zero
  RVec b;

  int blocks() const { return static_cast<int>(c.size()); }
  int constraints() const { return static_cast<int>(b.size()); }
  bool has(int i, int j) const { return a[i][j].size() != 0; }

  void validate() const {
    if (c.empty()) throw DomainError("SDP needs at least one block");
    if (static_cast<int>(a.size()) != constraints()) throw DomainError("one constraint row per entry of b");
    for (int j = 0; j < blocks(); ++j)
      if (c[j].rows() != c[j].cols() || c[j].rows() == 0) throw DomainError("objective blocks must be square");
    for (int i = 0; i < constraints(); ++i) {
      if (static_cast<int>(a[i].size()) != blocks()) throw DomainError("constraint rows must cover every block");
      for (int j = 0; j < blocks(); ++j)
        if (has(i, j) && (a[i][j].rows() != c[j].rows() || a[i][j].cols() != c[j].cols()))
          throw DomainError("constraint block dimension mismatch");
    }
  }
};

struct Options {
  /// Stop when the relative gap is below tol and both infeasibilities are
  /// below feasibility_tol.
  double tol = 1e-10;
  double feasibility_tol = 1e-10;
  int max_iter = 150;
  /// Divergence threshold for the heuristic infeasibility detection.
  double infeasibility_threshold = 1e12;
};

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, IterationLimit, NumericalFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::PrimalInfeasible: return "primal_infeasible";
    case Status::DualInfeasible: return "dual_infeasible";
    case Status::IterationLimit: return "iteration_limit";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct Result {
  Status status = Status::NumericalFailure;
  std::vector<RMat> x;
  std::vector<RMat> z;
  RVec y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;  // |p - d| / (1 + |p| + |d|)
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
};

namespace detail {

using Blocks = std::vector<RMat>;

inline double inner(const RMat& a, const RMat& b) { return a.cwiseProduct(b).sum(); }

inline RMat sym(const RMat& m) { return 0.5 * (m + m.transpose()); }

inline double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += inner(a[j], b[j]);
  return s;
}

inline double norm(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

/// A(X)
inline RVec constraint_map(const Problem& p, const Blocks& x) {
  RVec v = RVec::Zero(p.constraints());
  for (int i = 0; i < p.constraints(); ++i)
    for (int j = 0; j < p.blocks(); ++j)
      if (p.has(i, j)) v(i) += inner(p.a[i][j], x[j]);
  return v;
}

/// A^T(y)
inline Blocks adjoint_map(const Problem& p, const RVec& y) {
  Blocks out;
  out.reserve(p.blocks());
  for (int j = 0; j < p.blocks(); ++j) {
    RMat m = RMat::Zero(p.c[j].rows(), p.c[j].cols());
    for (int i = 0; i < p.constraints(); ++i)
      if (p.has(i, j)) m += y(i) * p.a[i][j];
    out.push_back(std::move(m));
  }
  return out;
}

/// Largest step t with X + t dX PSD (infinity when dX is PSD); 0 if X is not PD.
inline double max_step(const RMat& x, const RMat& dx) {
  Eigen::LLT<RMat> llt(x);
  if (!cholesky_succeeded(llt)) return 0.0;
  const auto L = llt.matrixL();
  RMat t = L.solve(dx);
  RMat s = L.solve(t.transpose());
  const double lmin = symmetric_eigenvalues(s).minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double max_step(const Blocks& x, const Blocks& dx) {
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < x.size(); ++j) t = std::min(t, max_step(x[j], dx[j]));
  return t;
}

}  // namespace detail

inline Result solve(const Problem& p, const Options& opt = {}) {
  using namespace detail;
  p.validate();
  const int m = p.constraints();
  const int nb = p.blocks();

  double n_total = 0.0;
  for (const auto& c : p.c) n_total += static_cast<double>(c.rows());

  // Initial point (standard infeasible-start heuristics).
  Blocks X(nb), Z(nb);
  for (int j = 0; j < nb; ++j) {
    const double n = static_cast<double>(p.c[j].rows());
    double xi = std::max(10.0, std::sqrt(n));
    double eta = std::max({10.0, std::sqrt(n), p.c[j].norm()});
    for (int i = 0; i < m; ++i) {
      if (!p.has(i, j)) continue;
      const double an = p.a[i][j].norm();
      xi = std::max(xi, n * (1.0 + std::abs(p.b(i))) / (1.0 + an));
      eta = std::max(eta, an);
    }
    X[j] = xi * RMat::Identity(p.c[j].rows(), p.c[j].cols());
    Z[j] = eta * RMat::Identity(p.c[j].rows(), p.c[j].cols());
  }
  RVec y = RVec::Zero(m);

  const double norm_b = p.b.norm();
  const double norm_c = norm(p.c);

  Result res;
  auto finish = [&](Status s) {
    res.status = s;
    res.x = X;
    res.z = Z;
    res.y = y;
    return res;
  };
  auto converged = [&](const Result& r) {
    return r.relative_gap <= opt.tol && r.primal_infeasibility <= opt.feasibility_tol &&
           r.dual_infeasibility <= opt.feasibility_tol;
  };

  Blocks Zinv(nb), XRdZi(nb);
  for (int it = 0; it <= opt.max_iter; ++it) {
    const RVec rp = p.b - constraint_map(p, X);
    const Blocks aty = adjoint_map(p, y);
    Blocks Rd(nb);
    for (int j = 0; j < nb; ++j) Rd[j] = p.c[j] - aty[j] - Z[j];

    res.primal_objective = inner(p.c, X);
    res.dual_objective = p.b.dot(y);
    res.primal_infeasibility = rp.norm() / (1.0 + norm_b);
    res.dual_infeasibility = norm(Rd) / (1.0 + norm_c);
    res.relative_gap = std::abs(res.primal_objective - res.dual_objective) /
                       (1.0 + std::abs(res.primal_objective) + std::abs(res.dual_objective));
    res.iterations = it;

    if (converged(res)) return finish(Status::Optimal);
    if (res.dual_objective > opt.infeasibility_threshold * (1.0 + norm_c)) return finish(Status::PrimalInfeasible);
    if (-res.primal_objective > opt.infeasibility_threshold * (1.0 + norm_b)) return finish(Status::DualInfeasible);
    if (it == opt.max_iter) break;

    const double mu = inner(X, Z) / n_total;

    // Schur complement M_ik = sum_j <A_ij, X_j A_kj Z_j^{-1}>.
    for (int j = 0; j < nb; ++j) {
      Eigen::LLT<RMat> llt(Z[j]);
      if (!cholesky_succeeded(llt)) return finish(Status::NumericalFailure);
      Zinv[j] = llt.solve(RMat::Identity(Z[j].rows(), Z[j].cols()));
      Zinv[j] = sym(Zinv[j]);
      XRdZi[j] = X[j] * Rd[j] * Zinv[j];
    }
    RMat M = RMat::Zero(m, m);
    for (int j = 0; j < nb; ++j) {
      for (int k = 0; k < m; ++k) {
        if (!p.has(k, j)) continue;
        const RMat P = X[j] * p.a[k][j] * Zinv[j];
        for (int i = 0; i <= k; ++i)
          if (p.has(i, j)) M(i, k) += inner(p.a[i][j], P);
      }
    }
    M = M.selfadjointView<Eigen::Upper>();
    Eigen::LLT<RMat> schur(M);
    if (!cholesky_succeeded(schur)) {
      Eigen::LDLT<RMat> ldlt(M);
      if (ldlt.info() != Eigen::Success) return finish(Status::NumericalFailure);
    }
    const RVec arhs = constraint_map(p, XRdZi);

    auto direction = [&](double sigma, const Blocks* dXa, const Blocks* dZa, Blocks& dX, RVec& dy, Blocks& dZ) {
      Blocks G(nb);
      for (int j = 0; j < nb; ++j) {
        G[j] = sigma * mu * Zinv[j] - X[j];
        if (dXa) G[j] -= sym((*dXa)[j] * (*dZa)[j] * Zinv[j]);
      }
      const RVec rhs = rp - constraint_map(p, G) + arhs;
      dy = cholesky_succeeded(schur) ? RVec(schur.solve(rhs)) : RVec(M.ldlt().solve(rhs));
      const Blocks atdy = adjoint_map(p, dy);
      dX.resize(nb);
      dZ.resize(nb);
      for (int j = 0; j < nb; ++j) {
        dZ[j] = Rd[j] - atdy[j];
        dX[j] = G[j] - sym(X[j] * dZ[j] * Zinv[j]);
      }
    };

    // Predictor.
    Blocks dXa, dZa;
    RVec dya;
    direction(0.0, nullptr, nullptr, dXa, dya, dZa);
    const double ap_a = std::min(1.0, max_step(X, dXa));
    const double ad_a = std::min(1.0, max_step(Z, dZa));
    double mu_a = 0.0;
    for (int j = 0; j < nb; ++j) mu_a += inner(X[j] + ap_a * dXa[j], Z[j] + ad_a * dZa[j]);
    mu_a /= n_total;
    const double expon = std::max(1.0, 3.0 * std::min(ap_a, ad_a) * std::min(ap_a, ad_a));
    const double sigma = std::clamp(std::pow(std::max(mu_a, 0.0) / mu, expon), 0.0, 1.0);

    // Corrector.
    Blocks dX, dZ;
    RVec dy;
    direction(sigma, &dXa, &dZa, dX, dy, dZ);
    const double tau = 0.9 + 0.09 * std::min(ap_a, ad_a);
    const double ap = std::min(1.0, tau * max_step(X, dX));
    const double ad = std::min(1.0, tau * max_step(Z, dZ));
    if (!(ap > 0.0) || !(ad > 0.0)) return finish(Status::NumericalFailure);

    for (int j = 0; j < nb; ++j) {
      X[j] = sym(X[j] + ap * dX[j]);
      Z[j] = sym(Z[j] + ad * dZ[j]);
    }
    y += ad * dy;
  }
  return finish(Status::IterationLimit);
}

}  // namespace jfcbd::sdp
