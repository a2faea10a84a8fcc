// SPDX-License-Identifier: Apache-2.0
//
// Separated design: communication-only beamforming, then a uniform power
// scale that lifts the target gain to the sensing threshold.
#pragma once

#include <algorithm>

#include "jfcbd/model.hpp"
#include "jfcbd/pd_solver.hpp"
#include "jfcbd/trace.hpp"

namespace jfcbd {

/// gamma = max(1, Gamma~_s / sum_k w_k^H B w_k)
inline double separation_scale(const ProblemInstance& inst, const CMat& w) {
  const double gain = beam_target_gain(inst, w);
  if (!(gain > 0.0)) throw DomainError("beamformers deliver no power toward the target");
  return std::max(1.0, inst.gamma_tilde_s() / gain);
}

/// Baseline solution; `scale` holds gamma. Compression noise follows the
/// scaled beamformers.
inline Solution solve_separated(const ProblemInstance& inst, const PdOptions& opt = {}) {
  Stopwatch clock;
  P4Result p4 = solve_p4(inst, opt);
  Solution sol;
  sol.method = "baseline";
  sol.scale = separation_scale(inst, p4.w);
  sol.w = std::sqrt(sol.scale) * p4.w;
  sol.mu = std::move(p4.mu);
  sol.early_exit = sol.scale == 1.0;
  sol.trace.early_exit = sol.early_exit;
  sol.trace.inner.push_back(std::move(p4.record));
  complete_solution(inst, sol);
  sol.trace.p4_time_s = clock.seconds();
  sol.trace.total_time_s = sol.trace.p4_time_s;
  return sol;
}

}  // namespace jfcbd
