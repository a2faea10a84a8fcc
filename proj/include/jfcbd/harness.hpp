// SPDX-License-Identifier: Apache-2.0
//
// Experiment driver: single solves, parameter sweeps, timing benchmarks and
// the verification suite. Results are CSV rows with a fixed, versioned schema.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "jfcbd/baseline.hpp"
#include "jfcbd/config_io.hpp"
#include "jfcbd/pd_solver.hpp"
#include "jfcbd/scenario.hpp"
#include "jfcbd/sdr_oracle.hpp"
#include "jfcbd/serialization.hpp"

namespace jfcbd {

inline constexpr int kCsvSchemaVersion = 1;

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Shortest round-trip decimal form; empty for NaN.
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// One CSV row: a (grid point, trial, method) outcome.
struct TrialRow {
  std::string config_hash;
  std::string parameter;
  double value = std::numeric_limits<double>::quiet_NaN();
  int trial = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string status = "ok";
  double objective_w = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  int bisection_iters = -1;
  long inner_iters = -1;
  double wall_time_s = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
  double certified_gap = std::numeric_limits<double>::quiet_NaN();
  double scale = std::numeric_limits<double>::quiet_NaN();
  std::string message;

  bool ok() const { return status == "ok"; }
};

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "schema_version", "config_hash", "parameter", "value", "trial", "seed", "method", "status",
      "objective_w", "objective_dbm", "lambda", "bisection_iters", "inner_iters", "wall_time_s",
      "feasible", "certified_gap", "scale", "message"};
  return cols;
}

class CsvWriter {
 public:
  /// With timing off, wall-time cells are left empty so reruns are byte-identical.
  CsvWriter(std::ostream& os, bool timing) : os_(os), timing_(timing) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
    os_ << "\r\n";
  }

  void write(const TrialRow& r) {
    const std::string cells[] = {
        std::to_string(kCsvSchemaVersion),
        r.config_hash,
        r.parameter,
        csv_number(r.value),
        std::to_string(r.trial),
        std::to_string(r.seed),
        r.method,
        r.status,
        csv_number(r.objective_w),
        csv_number(r.objective_w > 0.0 ? watts_to_dbm(r.objective_w) : std::numeric_limits<double>::quiet_NaN()),
        csv_number(r.lambda),
        r.bisection_iters < 0 ? "" : std::to_string(r.bisection_iters),
        r.inner_iters < 0 ? "" : std::to_string(r.inner_iters),
        timing_ ? csv_number(r.wall_time_s) : "",
        r.ok() ? (r.feasible ? "1" : "0") : "",
        csv_number(r.certified_gap),
        csv_number(r.scale),
        r.message,
    };
    bool first = true;
    for (const auto& c : cells) {
      os_ << (first ? "" : ",") << csv_field(c);
      first = false;
    }
    os_ << "\r\n";
  }

 private:
  std::ostream& os_;
  bool timing_;
};

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

/// Applies one sweep grid value. Capacities are given in Mbit/s, the sensing
/// target in dB; `antennas` sets N_t and K = N_t / 2.
inline SystemConfig apply_grid_point(SystemConfig cfg, const std::string& parameter, double value) {
  if (parameter == "gamma_s") {
    cfg.sensing_sinr_db = value;
  } else if (parameter == "C_dl") {
    cfg.dl_capacity_bps = value * 1e6;
  } else if (parameter == "C_ul") {
    cfg.ul_capacity_bps = value * 1e6;
  } else if (parameter == "antennas") {
    const int nt = static_cast<int>(std::lround(value));
    if (nt < 1 || std::abs(value - nt) > 0) throw DomainError("antenna grid values must be positive integers");
    cfg.tx_antennas = nt;
    cfg.users = std::max(1, nt / 2);
  } else {
    throw DomainError("unknown sweep parameter '" + parameter + "'");
  }
  return cfg;
}

struct TrialOptions {
  std::vector<std::string> methods{"pd", "sdr", "baseline"};
  SolverConfig solver;
  /// Timed repetitions per solve; above 1 a warm-up run precedes them and
  /// the median is reported.
  int repetitions = 1;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Runs `f` once, or warm-up plus `reps` timed runs; returns the last result
/// and the (median) wall time.
template <typename F>
auto timed(int reps, F&& f) {
  if (reps <= 1) {
    Stopwatch sw;
    auto r = f();
    return std::pair{std::move(r), sw.seconds()};
  }
  auto r = f();
  std::vector<double> times;
  for (int i = 0; i < reps; ++i) {
    Stopwatch sw;
    r = f();
    times.push_back(sw.seconds());
  }
  return std::pair{std::move(r), median(std::move(times))};
}

}  // namespace detail

/// Solves one instance with every requested method. Failures become rows
/// with a status; nothing is thrown for solver outcomes.
inline std::vector<TrialRow> run_trial(const SystemConfig& cfg, const TrialOptions& opt, const TrialRow& proto) {
  std::vector<TrialRow> rows;
  for (const auto& m : opt.methods) {
    TrialRow r = proto;
    r.method = m;
    r.seed = cfg.seed;
    r.config_hash = config_hash(cfg);
    rows.push_back(r);
  }

  std::optional<ProblemInstance> inst;
  try {
    inst = generate_instance(cfg);
  } catch (const std::exception& e) {
    for (auto& r : rows) {
      r.status = "invalid_instance";
      r.message = e.what();
    }
    return rows;
  }

  const PdOptions pd_opt = opt.solver.pd_options();
  SdpOptions sdp_opt;
  sdp_opt.tol = opt.solver.sdp_tol;
  std::optional<double> sdp_value;

  auto index_of = [&](const std::string& m) {
    return static_cast<std::size_t>(std::find(opt.methods.begin(), opt.methods.end(), m) - opt.methods.begin());
  };

  if (index_of("sdr") < rows.size()) {
    TrialRow& r = rows[index_of("sdr")];
    try {
      auto [sdp, t] = detail::timed(opt.repetitions, [&] { return solve_sdp(*inst, sdp_opt); });
      r.wall_time_s = t;
      if (sdp.optimal()) {
        r.objective_w = sdp.primal_value;
        r.certified_gap = sdp.gap;
        r.feasible = check_feasibility(*inst, extract_rank_one(*inst, sdp), 1e-6).feasible;
        sdp_value = sdp.primal_value;
      } else {
        r.status = sdp::to_string(sdp.status);
      }
    } catch (const std::exception& e) {
      r.status = "error";
      r.message = e.what();
    }
  }

  auto fill = [&](TrialRow& r, const Solution& s) {
    r.objective_w = s.objective;
    r.lambda = s.lambda;
    r.bisection_iters = static_cast<int>(s.trace.bisection.size());
    r.inner_iters = s.trace.inner_iterations_total();
    r.feasible = check_feasibility(*inst, s, 1e-6).feasible;
    r.scale = s.scale;
    if (sdp_value) r.certified_gap = (s.objective - *sdp_value) / *sdp_value;
  };

  for (const char* method : {"pd", "baseline"}) {
    if (index_of(method) >= rows.size()) continue;
    TrialRow& r = rows[index_of(method)];
    try {
      auto [s, t] = detail::timed(opt.repetitions, [&] {
        return std::string(method) == "pd" ? solve_jfcbd(*inst, pd_opt) : solve_separated(*inst, pd_opt);
      });
      r.wall_time_s = t;
      fill(r, s);
    } catch (const InfeasibleError& e) {
      r.status = "infeasible";
      r.message = e.what();
    } catch (const NumericalError& e) {
      r.status = "numerical_failure";
      r.message = e.what();
    } catch (const std::exception& e) {
      r.status = "error";
      r.message = e.what();
    }
  }
  return rows;
}

/// Runs `count` independent tasks on `jobs` threads; results keep task order.
template <typename T>
std::vector<T> run_parallel(int count, int jobs, const std::function<T(int)>& task) {
  std::vector<T> out(static_cast<std::size_t>(std::max(count, 0)));
  jobs = std::clamp(jobs, 1, std::max(count, 1));
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  return out;
}

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
  int trials = 1;
  TrialOptions trial;
  int jobs = 1;
};

/// Rows in (grid point, trial, method) order. Trial t uses seed base + t at
/// every grid point.
inline std::vector<TrialRow> run_sweep(const SystemConfig& base, const SweepSpec& spec) {
  if (spec.values.empty()) throw DomainError("sweep grid must be nonempty");
  if (spec.trials < 1) throw DomainError("sweep needs at least one trial");
  const int n = static_cast<int>(spec.values.size()) * spec.trials;
  auto chunks = run_parallel<std::vector<TrialRow>>(n, spec.jobs, [&](int i) {
    const double v = spec.values[static_cast<std::size_t>(i / spec.trials)];
    const int t = i % spec.trials;
    TrialRow proto;
    proto.parameter = spec.parameter;
    proto.value = v;
    proto.trial = t;
    SystemConfig cfg;
    try {
      cfg = apply_grid_point(base, spec.parameter, v);
    } catch (const std::exception& e) {
      proto.status = "invalid_instance";
      proto.message = e.what();
      std::vector<TrialRow> rows;
      for (const auto& m : spec.trial.methods) {
        TrialRow r = proto;
        r.method = m;
        r.seed = base.seed + static_cast<std::uint64_t>(t);
        rows.push_back(r);
      }
      return rows;
    }
    cfg.seed = base.seed + static_cast<std::uint64_t>(t);
    return run_trial(cfg, spec.trial, proto);
  });
  std::vector<TrialRow> rows;
  for (auto& c : chunks) rows.insert(rows.end(), c.begin(), c.end());
  return rows;
}

// ---------------------------------------------------------------------------
// Verification suite
// ---------------------------------------------------------------------------

struct VerifyOptions {
  int trials = 50;
  SystemConfig system;
  SolverConfig solver;
  /// Fault injection: PD powers are scaled by (1 + perturb_power) before the
  /// activity and certification checks.
  double perturb_power = 0.0;
  int jobs = 1;
};

struct CheckTally {
  std::string name;
  int passed = 0;
  int failed = 0;
  std::uint64_t first_failing_seed = 0;
  std::string first_failure;
};

struct VerifySummary {
  int trials = 0;
  std::vector<CheckTally> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (c.failed) return false;
    return true;
  }
};

inline const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names{"substitution", "lambda_range", "fixed_point_monotone",
                                              "feasibility", "activity", "certification"};
  return names;
}

namespace detail {

/// Outcome of every check on one instance: empty string means pass.
inline std::vector<std::string> verify_instance(const SystemConfig& cfg, const VerifyOptions& opt) {
  const auto& names = verify_check_names();
  std::vector<std::string> out(names.size());
  auto set = [&](const char* name, const std::string& msg) {
    const auto i = static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
    if (out[i].empty()) out[i] = msg;
  };

  const ProblemInstance inst = generate_instance(cfg);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  const int N = inst.tx_total();
  const int K = inst.users();

  // Substitution identities on random points.
  for (int rep = 0; rep < 4; ++rep) {
    CMat w(N, K);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < K; ++k) w(i, k) = cd(normal(rng), normal(rng));
    const RVec q_dl = optimal_q_dl(inst, w);
    for (int n = 0; n < N; ++n) {
      const double e = std::abs(dl_rate(w, q_dl, n) - inst.dl_capacity());
      if (!(e <= 1e-9)) set("substitution", "DL rate off by " + csv_number(e) + " on antenna " + std::to_string(n));
    }
    const CMat R = transmit_covariance(w, q_dl);
    const RVec q_ul = optimal_q_ul(inst, R);
    for (int m = 0; m < inst.rx_antennas(); ++m) {
      const double e = std::abs(ul_rate(inst, R, q_ul, m) - inst.ul_capacity());
      if (!(e <= 1e-9)) set("substitution", "UL rate off by " + csv_number(e) + " on antenna " + std::to_string(m));
    }
  }

  // Eigenvalue sign conditions on the lambda intervals.
  {
    const double d1 = psd_upper_bound(inst);
    const double d2 = nsd_lower_bound(inst);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
      const auto c1 = classify_lambda(inst, d1 * u(rng));
      if (!c1.consistent) set("lambda_range", "min eigenvalue " + csv_number(c1.min_eig) + " in the PSD interval");
      if (std::isfinite(d2)) {
        const auto c2 = classify_lambda(inst, d2 * (1.0 + 10.0 * u(rng)));
        if (!c2.consistent) set("lambda_range", "max eigenvalue " + csv_number(c2.max_eig) + " in the NSD interval");
      }
    }
  }

  PdOptions pd_opt = opt.solver.pd_options();
  pd_opt.record_iterates = true;
  Solution pd;
  try {
    pd = solve_jfcbd(inst, pd_opt);
  } catch (const std::exception& e) {
    for (const char* n : {"fixed_point_monotone", "feasibility", "activity", "certification"})
      set(n, std::string("solver failed: ") + e.what());
    return out;
  }

  for (const auto& rec : pd.trace.inner) {
    if (rec.mode != FixedPointMode::Descending) continue;
    for (std::size_t t = 1; t < rec.iterates.size(); ++t) {
      const RVec& a = rec.iterates[t - 1];
      const RVec& b = rec.iterates[t];
      if ((b.array() > a.array()).any()) {
        set("fixed_point_monotone", "iterate " + std::to_string(t) + " increased at lambda " + csv_number(rec.lambda));
        break;
      }
    }
  }

  if (opt.perturb_power != 0.0) {
    pd.w *= std::sqrt(1.0 + opt.perturb_power);
    complete_solution(inst, pd);
  }

  if (!check_feasibility(inst, pd, 1e-6).feasible) set("feasibility", "PD solution infeasible at tol 1e-6");

  for (int k = 0; k < K; ++k) {
    const double rel = std::abs(comm_sinr(inst, pd.w, pd.q_dl, k) - inst.gamma(k)) / inst.gamma(k);
    if (!(rel <= 1e-6)) set("activity", "user " + std::to_string(k) + " SINR off target by " + csv_number(rel));
  }
  if (pd.lambda > 0.0) {
    const double gts = inst.gamma_tilde_s();
    const double delta = subgradient(inst, pd.w);
    if (!(std::abs(delta) <= opt.solver.tol * gts))
      set("activity", "sensing subgradient " + csv_number(delta / gts) + " (relative)");
    if (!(pd.lambda * delta <= 1e-8 * gts)) set("activity", "complementary slackness violated");
  }

  SdpOptions sdp_opt;
  sdp_opt.tol = opt.solver.sdp_tol;
  const SdpSolution sdp = solve_sdp(inst, sdp_opt);
  const CertificateReport cert = certify(inst, pd, sdp, opt.solver.certify_tol);
  if (!cert.pass)
    set("certification", "relative gap " + csv_number(cert.relative_gap) + ", SDP " +
                             sdp::to_string(sdp.status) + (cert.pd_feasible ? "" : ", PD infeasible"));
  return out;
}

}  // namespace detail

inline VerifySummary run_verify(const VerifyOptions& opt) {
  VerifySummary sum;
  sum.trials = std::max(opt.trials, 0);
  for (const auto& n : verify_check_names()) sum.checks.push_back(CheckTally{n});
  auto results = run_parallel<std::vector<std::string>>(sum.trials, opt.jobs, [&](int t) {
    SystemConfig cfg = opt.system;
    cfg.seed = opt.system.seed + static_cast<std::uint64_t>(t);
    try {
      return detail::verify_instance(cfg, opt);
    } catch (const std::exception& e) {
      return std::vector<std::string>(verify_check_names().size(), std::string("instance error: ") + e.what());
    }
  });
  for (int t = 0; t < sum.trials; ++t) {
    const auto& r = results[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < r.size(); ++i) {
      CheckTally& c = sum.checks[i];
      if (r[i].empty()) {
        ++c.passed;
      } else if (c.failed++ == 0) {
        c.first_failing_seed = opt.system.seed + static_cast<std::uint64_t>(t);
        c.first_failure = r[i];
      }
    }
  }
  return sum;
}

inline Json verify_summary_to_json(const VerifySummary& s) {
  Json checks = Json::array();
  for (const auto& c : s.checks) {
    Json j = {{"name", c.name}, {"passed", c.passed}, {"failed", c.failed}};
    if (c.failed) {
      j["first_failing_seed"] = c.first_failing_seed;
      j["first_failure"] = c.first_failure;
    }
    checks.push_back(std::move(j));
  }
  return {{"trials", s.trials}, {"pass", s.pass()}, {"checks", std::move(checks)}};
}

}  // namespace jfcbd
