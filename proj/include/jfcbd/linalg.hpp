// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jfcbd {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// Thrown when an argument lies outside the domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Unit conversions. Every dB <-> linear conversion in the library goes
// through these two helpers.
// ---------------------------------------------------------------------------

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Watts to dBm.
inline double watts_to_dbm(double w) { return linear_to_db(w) + 30.0; }

/// dBm to watts.
inline double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }

// ---------------------------------------------------------------------------
// Hermitian helpers
// ---------------------------------------------------------------------------

/// (M + M^H) / 2
template <typename Derived>
auto hermitian_part(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.adjoint())).eval();
}

/// Real part of x^H M y.
inline double quad_form(const CVec& x, const CMat& m) {
  return (x.adjoint() * m * x)(0, 0).real();
}

/// Whether a computed Cholesky factor certifies positive definiteness.
/// LLT only inspects the pivots; non-finite factors are rejected as well.
template <typename Mat>
bool cholesky_succeeded(const Eigen::LLT<Mat>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double d = std::real(l(i, i));
    if (!(d > 0.0) || !std::isfinite(d)) return false;
  }
  return true;
}

/// Cholesky factorization that reports failure instead of producing garbage.
/// Positive definiteness is decided by factorization success alone.
template <typename Mat>
std::optional<Eigen::LLT<Mat>> try_cholesky(const Mat& m) {
  Eigen::LLT<Mat> llt(m);
  if (!cholesky_succeeded(llt)) return std::nullopt;
  return llt;
}

inline RVec hermitian_eigenvalues(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline RVec symmetric_eigenvalues(const RMat& m) {
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace jfcbd
