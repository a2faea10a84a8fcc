// SPDX-License-Identifier: Apache-2.0
//
// Solution and report files (JSON).
//
// Solution format "jfcbd-solution", version 1:
//   method, dims {L, N_t, N, M, K}, objective_w, objective_dbm, lambda,
//   mu[K], scale, early_exit, w[K][N] as [re, im] pairs, q_dl[N], q_ul[M],
//   and an optional "meta" object (seed, config hash).
// Timing never enters a solution file, so equal inputs give equal bytes.
#pragma once

#include <fstream>
#include <string>

#include "json.hpp"
#include "jfcbd/model.hpp"
#include "jfcbd/sdr_oracle.hpp"

namespace jfcbd {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSolutionFormat = "jfcbd-solution";
inline constexpr int kSolutionVersion = 1;

namespace detail {

inline Json to_json(const RVec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json to_json(const CVec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(Json::array({v(i).real(), v(i).imag()}));
  return a;
}

inline RVec real_vector(const Json& a, const char* field) {
  if (!a.is_array()) throw DomainError(std::string("solution field '") + field + "' must be an array");
  RVec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

inline CVec complex_vector(const Json& a, const char* field) {
  if (!a.is_array()) throw DomainError(std::string("solution field '") + field + "' must be an array");
  CVec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_array() || a[i].size() != 2)
      throw DomainError(std::string("solution field '") + field + "' needs [re, im] pairs");
    v(static_cast<Eigen::Index>(i)) = cd(a[i][0].get<double>(), a[i][1].get<double>());
  }
  return v;
}

}  // namespace detail

inline Json solution_to_json(const ProblemInstance& inst, const Solution& sol, const Json& meta = Json()) {
  Json j;
  j["format"] = kSolutionFormat;
  j["version"] = kSolutionVersion;
  j["method"] = sol.method;
  j["dims"] = {{"L", inst.tx_count()}, {"N_t", inst.tx_antennas()}, {"N", inst.tx_total()},
               {"M", inst.rx_antennas()}, {"K", inst.users()}};
  j["objective_w"] = sol.objective;
  j["objective_dbm"] = watts_to_dbm(sol.objective);
  j["lambda"] = sol.lambda;
  j["mu"] = detail::to_json(sol.mu);
  j["scale"] = sol.scale;
  j["early_exit"] = sol.early_exit;
  Json w = Json::array();
  for (Eigen::Index k = 0; k < sol.w.cols(); ++k) w.push_back(detail::to_json(CVec(sol.w.col(k))));
  j["w"] = std::move(w);
  j["q_dl"] = detail::to_json(sol.q_dl);
  j["q_ul"] = detail::to_json(sol.q_ul);
  if (!meta.is_null()) j["meta"] = meta;
  return j;
}

inline Solution solution_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", "") != kSolutionFormat)
    throw DomainError("not a jfcbd solution file");
  if (j.value("version", 0) != kSolutionVersion)
    throw DomainError("unsupported solution version " + j.value("version", Json(nullptr)).dump());
  Solution sol;
  sol.method = j.at("method").get<std::string>();
  sol.objective = j.at("objective_w").get<double>();
  sol.lambda = j.at("lambda").get<double>();
  sol.mu = detail::real_vector(j.at("mu"), "mu");
  sol.scale = j.at("scale").get<double>();
  sol.early_exit = j.at("early_exit").get<bool>();
  const Json& w = j.at("w");
  const int K = j.at("dims").at("K").get<int>();
  const int N = j.at("dims").at("N").get<int>();
  if (!w.is_array() || static_cast<int>(w.size()) != K) throw DomainError("solution field 'w' must hold K beamformers");
  sol.w.resize(N, K);
  for (int k = 0; k < K; ++k) {
    const CVec col = detail::complex_vector(w[static_cast<std::size_t>(k)], "w");
    if (col.size() != N) throw DomainError("beamformer length must equal N");
    sol.w.col(k) = col;
  }
  sol.q_dl = detail::real_vector(j.at("q_dl"), "q_dl");
  sol.q_ul = detail::real_vector(j.at("q_ul"), "q_ul");
  sol.trace.early_exit = sol.early_exit;
  return sol;
}

inline Json feasibility_to_json(const FeasibilityReport& r) {
  return {{"feasible", r.feasible},
          {"tolerance", r.tolerance},
          {"min_slack", r.min_slack()},
          {"comm_sinr_slack", detail::to_json(r.comm_sinr_slack)},
          {"sensing_slack", r.sensing_slack},
          {"dl_rate_slack", detail::to_json(r.dl_rate_slack)},
          {"ul_rate_slack", detail::to_json(r.ul_rate_slack)}};
}

inline Json certificate_to_json(const CertificateReport& r) {
  return {{"pass", r.pass},
          {"tolerance", r.tolerance},
          {"pd_objective_w", r.pd_objective},
          {"sdp_value_w", r.sdp_value},
          {"relative_gap", r.relative_gap},
          {"pd_feasible", r.pd_feasible},
          {"sdp_optimal", r.sdp_optimal},
          {"sdp_duality_gap", r.sdp_gap}};
}

/// Writes `j` with two-space indentation and a trailing newline.
inline void write_json(const std::string& path, const Json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

inline Json read_json(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace jfcbd
