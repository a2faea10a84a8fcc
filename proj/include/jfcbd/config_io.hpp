// SPDX-License-Identifier: Apache-2.0
//
// YAML experiment configuration.
//
//   seed: 1
//   system:        { tx_count, tx_antennas, rx_antennas, users }
//   radio:         { carrier_freq_hz, bandwidth_hz, noise_psd_dbm_hz }
//   fronthaul:     { dl_capacity_bps, ul_capacity_bps }
//   requirements:  { comm_sinr_db (scalar or per-user list), sensing_sinr_db }
//   geometry:      { user_radius_m, target_radius_m, tx_spacing_m, min_distance_m,
//                    sensing_path: total_distance | two_segment }
//   solver:        { tol, fixed_point_tol, fixed_point_max_iter, mode, certify_tol, sdp_tol }
//   sweep:         { parameter, values, trials, methods }
//   bench:         { repetitions, trials }
//
// Every section and key is optional; unknown keys are errors. Diagnostics
// carry the file name, line, column and dotted field path.
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "jfcbd/pd_solver.hpp"
#include "jfcbd/scenario.hpp"
#include "jfcbd/serialization.hpp"

namespace jfcbd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double tol = 1e-6;  // |Delta| <= tol * Gamma~_s
  double fixed_point_tol = 1e-10;
  int fixed_point_max_iter = 10000;
  FixedPointMode mode = FixedPointMode::Descending;
  double certify_tol = 1e-4;
  double sdp_tol = 1e-8;

  PdOptions pd_options() const {
    PdOptions o;
    o.bisection_tol = tol;
    o.fixed_point_tol = fixed_point_tol;
    o.fixed_point_max_iter = fixed_point_max_iter;
    o.mode = mode;
    return o;
  }
};

struct SweepConfig {
  std::string parameter = "gamma_s";
  std::vector<double> values{0.0, 5.0, 10.0, 15.0};
  int trials = 20;
  std::vector<std::string> methods{"pd", "sdr", "baseline"};
};

struct BenchConfig {
  int repetitions = 5;
  int trials = 5;
};

struct ExperimentConfig {
  SystemConfig system;
  SolverConfig solver;
  SweepConfig sweep;
  BenchConfig bench;
};

inline const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{"gamma_s", "C_dl", "C_ul", "antennas"};
  return names;
}

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"pd", "sdr", "baseline"};
  return names;
}

namespace detail {

class YamlReader {
 public:
  explicit YamlReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (n.IsDefined() && n.Mark().line >= 0) os << ':' << n.Mark().line + 1 << ':' << n.Mark().column + 1;
    os << ": field '" << field << "': " << msg;
    throw ConfigError(os.str());
  }

  void require_map(const YAML::Node& n, const std::string& field, const std::set<std::string>& keys) const {
    if (!n.IsMap()) fail(n, field, "expected a mapping");
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, join(field, key), "unknown key");
    }
  }

  template <typename T>
  void read(const YAML::Node& parent, const std::string& field, const char* key, T& out) const {
    const YAML::Node n = parent[key];
    if (!n) return;
    out = scalar<T>(n, join(field, key));
  }

  template <typename T>
  T scalar(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, field, "cannot convert '" + n.Scalar() + "' to " + type_name<T>());
    }
  }

  template <typename T>
  std::vector<T> scalar_or_list(const YAML::Node& n, const std::string& field) const {
    std::vector<T> v;
    if (n.IsSequence()) {
      for (std::size_t i = 0; i < n.size(); ++i) v.push_back(scalar<T>(n[i], field + "[" + std::to_string(i) + "]"));
    } else {
      v.push_back(scalar<T>(n, field));
    }
    return v;
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

 private:
  template <typename T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, int>) return "integer";
    else if constexpr (std::is_same_v<T, std::uint64_t>) return "unsigned integer";
    else if constexpr (std::is_same_v<T, double>) return "number";
    else if constexpr (std::is_same_v<T, bool>) return "boolean";
    else return "string";
  }

  std::string source_;
};

}  // namespace detail

/// Parses YAML text; `source` names it in diagnostics.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  detail::YamlReader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  r.require_map(root, "", {"seed", "system", "radio", "fronthaul", "requirements", "geometry", "solver", "sweep", "bench"});

  SystemConfig& s = cfg.system;
  r.read(root, "", "seed", s.seed);
  if (const auto n = root["system"]) {
    r.require_map(n, "system", {"tx_count", "tx_antennas", "rx_antennas", "users"});
    r.read(n, "system", "tx_count", s.tx_count);
    r.read(n, "system", "tx_antennas", s.tx_antennas);
    r.read(n, "system", "rx_antennas", s.rx_antennas);
    r.read(n, "system", "users", s.users);
  }
  if (const auto n = root["radio"]) {
    r.require_map(n, "radio", {"carrier_freq_hz", "bandwidth_hz", "noise_psd_dbm_hz"});
    r.read(n, "radio", "carrier_freq_hz", s.carrier_freq_hz);
    r.read(n, "radio", "bandwidth_hz", s.bandwidth_hz);
    r.read(n, "radio", "noise_psd_dbm_hz", s.noise_psd_dbm_hz);
  }
  if (const auto n = root["fronthaul"]) {
    r.require_map(n, "fronthaul", {"dl_capacity_bps", "ul_capacity_bps"});
    r.read(n, "fronthaul", "dl_capacity_bps", s.dl_capacity_bps);
    r.read(n, "fronthaul", "ul_capacity_bps", s.ul_capacity_bps);
  }
  if (const auto n = root["requirements"]) {
    r.require_map(n, "requirements", {"comm_sinr_db", "sensing_sinr_db"});
    if (const auto c = n["comm_sinr_db"]) s.comm_sinr_db = r.scalar_or_list<double>(c, "requirements.comm_sinr_db");
    r.read(n, "requirements", "sensing_sinr_db", s.sensing_sinr_db);
  }
  if (const auto n = root["geometry"]) {
    r.require_map(n, "geometry", {"user_radius_m", "target_radius_m", "tx_spacing_m", "min_distance_m", "sensing_path"});
    r.read(n, "geometry", "user_radius_m", s.user_radius_m);
    r.read(n, "geometry", "target_radius_m", s.target_radius_m);
    r.read(n, "geometry", "tx_spacing_m", s.tx_spacing_m);
    r.read(n, "geometry", "min_distance_m", s.min_distance_m);
    if (const auto p = n["sensing_path"]) {
      const auto v = r.scalar<std::string>(p, "geometry.sensing_path");
      if (v == "total_distance") s.sensing_path = SensingPathModel::TotalDistance;
      else if (v == "two_segment") s.sensing_path = SensingPathModel::TwoSegment;
      else r.fail(p, "geometry.sensing_path", "expected total_distance or two_segment, got '" + v + "'");
    }
  }
  if (const auto n = root["solver"]) {
    SolverConfig& o = cfg.solver;
    r.require_map(n, "solver", {"tol", "fixed_point_tol", "fixed_point_max_iter", "mode", "certify_tol", "sdp_tol"});
    r.read(n, "solver", "tol", o.tol);
    r.read(n, "solver", "fixed_point_tol", o.fixed_point_tol);
    r.read(n, "solver", "fixed_point_max_iter", o.fixed_point_max_iter);
    r.read(n, "solver", "certify_tol", o.certify_tol);
    r.read(n, "solver", "sdp_tol", o.sdp_tol);
    if (const auto m = n["mode"]) {
      const auto v = r.scalar<std::string>(m, "solver.mode");
      if (v == "descending") o.mode = FixedPointMode::Descending;
      else if (v == "ascending") o.mode = FixedPointMode::Ascending;
      else r.fail(m, "solver.mode", "expected descending or ascending, got '" + v + "'");
    }
    if (!(o.tol > 0.0)) r.fail(n["tol"], "solver.tol", "must be positive");
    if (!(o.fixed_point_tol > 0.0)) r.fail(n["fixed_point_tol"], "solver.fixed_point_tol", "must be positive");
    if (o.fixed_point_max_iter < 1) r.fail(n["fixed_point_max_iter"], "solver.fixed_point_max_iter", "must be >= 1");
  }
  if (const auto n = root["sweep"]) {
    SweepConfig& w = cfg.sweep;
    r.require_map(n, "sweep", {"parameter", "values", "trials", "methods"});
    if (const auto p = n["parameter"]) {
      w.parameter = r.scalar<std::string>(p, "sweep.parameter");
      const auto& names = sweep_parameters();
      if (std::find(names.begin(), names.end(), w.parameter) == names.end())
        r.fail(p, "sweep.parameter", "expected gamma_s, C_dl, C_ul or antennas, got '" + w.parameter + "'");
    }
    if (const auto v = n["values"]) {
      w.values = r.scalar_or_list<double>(v, "sweep.values");
      if (w.values.empty()) r.fail(v, "sweep.values", "grid must be nonempty");
    }
    r.read(n, "sweep", "trials", w.trials);
    if (w.trials < 1) r.fail(n["trials"], "sweep.trials", "must be >= 1");
    if (const auto m = n["methods"]) {
      w.methods = r.scalar_or_list<std::string>(m, "sweep.methods");
      for (const auto& name : w.methods)
        if (std::find(method_names().begin(), method_names().end(), name) == method_names().end())
          r.fail(m, "sweep.methods", "unknown method '" + name + "'");
    }
  }
  if (const auto n = root["bench"]) {
    r.require_map(n, "bench", {"repetitions", "trials"});
    r.read(n, "bench", "repetitions", cfg.bench.repetitions);
    r.read(n, "bench", "trials", cfg.bench.trials);
    if (cfg.bench.repetitions < 1) r.fail(n["repetitions"], "bench.repetitions", "must be >= 1");
    if (cfg.bench.trials < 1) r.fail(n["trials"], "bench.trials", "must be >= 1");
  }

  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

/// Canonical JSON form of a system configuration (seed excluded).
inline Json system_to_json(const SystemConfig& s) {
  return {{"tx_count", s.tx_count},
          {"tx_antennas", s.tx_antennas},
          {"rx_antennas", s.rx_antennas},
          {"users", s.users},
          {"carrier_freq_hz", s.carrier_freq_hz},
          {"bandwidth_hz", s.bandwidth_hz},
          {"noise_psd_dbm_hz", s.noise_psd_dbm_hz},
          {"dl_capacity_bps", s.dl_capacity_bps},
          {"ul_capacity_bps", s.ul_capacity_bps},
          {"comm_sinr_db", s.comm_sinr_db},
          {"sensing_sinr_db", s.sensing_sinr_db},
          {"user_radius_m", s.user_radius_m},
          {"target_radius_m", s.target_radius_m},
          {"tx_spacing_m", s.tx_spacing_m},
          {"min_distance_m", s.min_distance_m},
          {"sensing_path", to_string(s.sensing_path)}};
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hex digest of the canonical system configuration.
inline std::string config_hash(const SystemConfig& s) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t h = fnv1a(system_to_json(s).dump());
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

}  // namespace jfcbd
