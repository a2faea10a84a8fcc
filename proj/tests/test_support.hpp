// SPDX-License-Identifier: Apache-2.0
//
// Small hand-built instances shared by the unit tests.
#pragma once

#include <random>

#include "jfcbd/model.hpp"
#include "jfcbd/scenario.hpp"

namespace jfcbd::testing {

struct ToySpec {
  int L = 2;
  int Nt = 2;
  int M = 4;
  int K = 2;
  double alpha = 1.0 / 7.0;
  double beta = 1.0 / 7.0;
  double gamma_c = 2.0;
  double gamma_s = 1.0;
  double g_abs = 1.0;
  double h_scale = 1.0;
  std::uint64_t seed = 3;
};

/// Unit noise, unit-variance channels, sensing gains of magnitude g_abs.
inline ProblemInstance toy_instance(const ToySpec& s) {
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  InstanceData d;
  d.tx_count = s.L;
  d.tx_antennas = s.Nt;
  d.rx_antennas = s.M;
  for (int k = 0; k < s.K; ++k) {
    CVec h(s.L * s.Nt);
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = s.h_scale * cd(n(rng), n(rng));
    d.h.push_back(h);
  }
  d.g.resize(s.L);
  for (int l = 0; l < s.L; ++l) d.g(l) = std::polar(s.g_abs, u(rng));
  d.a_t.resize(s.L * s.Nt);
  for (int l = 0; l < s.L; ++l) d.a_t.segment(l * s.Nt, s.Nt) = steering_vector(0.3 + 0.7 * l, s.Nt);
  d.a_r = steering_vector(1.1, s.M);
  d.alpha = s.alpha;
  d.beta = s.beta;
  d.gamma_c = RVec::Constant(s.K, s.gamma_c);
  d.gamma_s = s.gamma_s;
  return ProblemInstance::build(std::move(d));
}

/// Desk-sized random deployment (L=2, N_t=4, M=4, K=2) for a given seed.
inline ProblemInstance desk_instance(std::uint64_t seed) {
  SystemConfig cfg;
  cfg.seed = seed;
  return generate_instance(cfg);
}

}  // namespace jfcbd::testing
