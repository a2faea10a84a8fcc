// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "jfcbd/linalg.hpp"

namespace jfcbd {

enum class FixedPointMode { Ascending, Descending };

/// Outcome of one inner (fixed-lambda) solve.
enum class InnerStatus {
  Converged,
  DualInfeasible,   // C(lambda, mu) lost positive definiteness
  IterationCap,     // fixed point did not settle within the iteration cap
  NoStart,          // no admissible starting point could be constructed
  DegeneratePower,  // power system singular or produced a non-positive power
};

inline const char* to_string(FixedPointMode m) {
  return m == FixedPointMode::Ascending ? "ascending" : "descending";
}

inline const char* to_string(InnerStatus s) {
  switch (s) {
    case InnerStatus::Converged: return "converged";
    case InnerStatus::DualInfeasible: return "dual_infeasible";
    case InnerStatus::IterationCap: return "iteration_cap";
    case InnerStatus::NoStart: return "no_start";
    case InnerStatus::DegeneratePower: return "degenerate_power";
  }
  return "unknown";
}

struct InnerSolveRecord {
  double lambda = 0.0;
  FixedPointMode mode = FixedPointMode::Descending;
  InnerStatus status = InnerStatus::Converged;
  int iterations = 0;
  /// max_k |mu_k^(t) - mu_k^(t-1)| / max(1, mu_k^(t)) per iteration.
  std::vector<double> residuals;
  /// Full mu iterates (including the start point); only filled on request.
  std::vector<RVec> iterates;
};

struct BisectionRecord {
  int index = 0;
  double lambda = 0.0;
  double delta = 0.0;  // NaN when the inner solve failed
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  InnerStatus status = InnerStatus::Converged;
  int inner_iterations = 0;
  double inner_residual = 0.0;
  double wall_time_s = 0.0;
  double target_gain = 0.0;  // sum_k w_k^H B w_k at this lambda
};

struct SolveTrace {
  bool early_exit = false;
  std::vector<BisectionRecord> bisection;
  std::vector<InnerSolveRecord> inner;
  double p4_time_s = 0.0;
  double bisection_time_s = 0.0;
  double total_time_s = 0.0;

  int inner_iterations_total() const {
    int n = 0;
    for (const auto& r : inner) n += r.iterations;
    return n;
  }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Line-oriented convergence log. One `#` header, then one row per
/// bisection step:
///   iter lambda delta lambda_min lambda_max status inner_iters inner_residual target_gain wall_s
inline void write_trace_log(std::ostream& os, const SolveTrace& t) {
  os << "# jfcbd-trace v1\n";
  os << "# early_exit " << (t.early_exit ? 1 : 0) << " p4_time_s " << t.p4_time_s
     << " bisection_time_s " << t.bisection_time_s << " total_time_s " << t.total_time_s << "\n";
  os << "# iter lambda delta lambda_min lambda_max status inner_iters inner_residual target_gain wall_s\n";
  const auto old = os.precision(17);
  for (const auto& r : t.bisection) {
    os << r.index << ' ' << r.lambda << ' ' << r.delta << ' ' << r.lambda_min << ' ' << r.lambda_max
       << ' ' << to_string(r.status) << ' ' << r.inner_iterations << ' ' << r.inner_residual << ' '
       << r.target_gain << ' ' << r.wall_time_s << '\n';
  }
  os.precision(old);
}

}  // namespace jfcbd
