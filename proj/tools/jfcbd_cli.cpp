// SPDX-License-Identifier: Apache-2.0
//
// jfcbd command-line interface: solve, sweep, verify, bench.
//
// Exit status: 0 success, 1 a solve/check failed, 2 usage, config or I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jfcbd/harness.hpp"

namespace fs = std::filesystem;
using namespace jfcbd;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonArgs& a, const std::string& out_help) {
  cmd->add_option("--config", a.config, "YAML experiment configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "Override the configured seed");
  cmd->add_option("--tol", a.tol, "Bisection tolerance: -tol * Gamma~_s <= Delta <= 0")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, out_help);
  cmd->add_option("--jobs", a.jobs, "Worker threads")->check(CLI::Range(1, 256));
}

ExperimentConfig resolve(const CommonArgs& a) {
  ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
  if (a.seed) cfg.system.seed = *a.seed;
  if (a.tol) cfg.solver.tol = *a.tol;
  return cfg;
}

/// Output stream for CSV: a file when a path is given, stdout otherwise.
class CsvSink {
 public:
  explicit CsvSink(const std::string& path) {
    if (path.empty() || path == "-") return;
    if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    file_.open(path, std::ios::binary);
    if (!file_) throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_solve(const CommonArgs& a, const std::string& method, bool do_certify) {
  const ExperimentConfig cfg = resolve(a);
  const fs::path out = a.out.empty() ? fs::path(".") : fs::path(a.out);
  fs::create_directories(out);

  ProblemInstance inst = [&] {
    try {
      return generate_instance(cfg.system);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("cannot construct the instance: ") + e.what());
    }
  }();

  const PdOptions pd_opt = cfg.solver.pd_options();
  SdpOptions sdp_opt;
  sdp_opt.tol = cfg.solver.sdp_tol;

  Solution sol;
  std::optional<SdpSolution> sdp;
  try {
    if (method == "pd") {
      sol = solve_jfcbd(inst, pd_opt);
    } else if (method == "baseline") {
      sol = solve_separated(inst, pd_opt);
    } else {
      sdp = solve_sdp(inst, sdp_opt);
      if (!sdp->optimal()) {
        std::cerr << "SDP solve ended with status " << sdp::to_string(sdp->status) << "\n";
        return kExitFail;
      }
      sol = extract_rank_one(inst, *sdp);
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitFail;
  } catch (const NumericalError& e) {
    std::ofstream log(out / "trace.log");
    write_trace_log(log, e.trace());
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitFail;
  }

  const Json meta = {{"seed", cfg.system.seed}, {"config_hash", config_hash(cfg.system)}};
  write_json((out / "solution.json").string(), solution_to_json(inst, sol, meta));

  const FeasibilityReport feas = check_feasibility(inst, sol, 1e-6);
  Json report = {{"method", sol.method}, {"seed", cfg.system.seed}, {"config_hash", config_hash(cfg.system)},
                 {"objective_w", sol.objective}, {"objective_dbm", watts_to_dbm(sol.objective)},
                 {"lambda", sol.lambda}, {"early_exit", sol.early_exit},
                 {"bisection_iterations", sol.trace.bisection.size()},
                 {"inner_iterations", sol.trace.inner_iterations_total()},
                 {"feasibility", feasibility_to_json(feas)}};
  bool ok = feas.feasible;
  if (do_certify) {
    if (!sdp) sdp = solve_sdp(inst, sdp_opt);
    const CertificateReport cert = certify(inst, sol, *sdp, cfg.solver.certify_tol);
    report["certificate"] = certificate_to_json(cert);
    ok = ok && cert.pass;
  }
  write_json((out / "report.json").string(), report);
  {
    std::ofstream log(out / "trace.log");
    write_trace_log(log, sol.trace);
  }

  std::cout << "method " << sol.method << "  objective " << csv_number(sol.objective) << " W ("
            << csv_number(watts_to_dbm(sol.objective)) << " dBm)  feasible " << (feas.feasible ? "yes" : "no");
  if (report.contains("certificate"))
    std::cout << "  certificate " << (report["certificate"]["pass"].get<bool>() ? "pass" : "FAIL") << " (gap "
              << csv_number(report["certificate"]["relative_gap"].get<double>()) << ")";
  std::cout << "\n";
  return ok ? 0 : kExitFail;
}

int write_rows(const std::string& out, const std::vector<TrialRow>& rows, bool timing) {
  CsvSink sink(out);
  CsvWriter w(sink.stream(), timing);
  for (const auto& r : rows) w.write(r);
  return 0;
}

int cmd_sweep(const CommonArgs& a, std::optional<int> trials, const std::vector<std::string>& methods,
              const std::string& parameter, const std::vector<double>& values, bool timing, int reps) {
  const ExperimentConfig cfg = resolve(a);
  SweepSpec spec;
  spec.parameter = parameter.empty() ? cfg.sweep.parameter : parameter;
  spec.values = values.empty() ? cfg.sweep.values : values;
  spec.trials = trials.value_or(cfg.sweep.trials);
  spec.trial.methods = methods.empty() ? cfg.sweep.methods : methods;
  spec.trial.solver = cfg.solver;
  spec.trial.repetitions = reps;
  spec.jobs = a.jobs;
  const auto rows = run_sweep(cfg.system, spec);
  write_rows(a.out, rows, timing);
  int failed = 0;
  for (const auto& r : rows) failed += !r.ok();
  std::cerr << rows.size() << " rows, " << failed << " with a non-ok status\n";
  return 0;
}

int cmd_bench(const CommonArgs& a, std::optional<int> trials, const std::vector<std::string>& methods,
              std::optional<int> reps) {
  const ExperimentConfig cfg = resolve(a);
  TrialOptions opt;
  opt.methods = methods.empty() ? std::vector<std::string>{"pd", "sdr"} : methods;
  opt.solver = cfg.solver;
  opt.repetitions = reps.value_or(cfg.bench.repetitions);
  const int n = trials.value_or(cfg.bench.trials);
  std::vector<TrialRow> rows;
  // Timings are taken one trial at a time so workers do not compete for cores.
  for (int t = 0; t < n; ++t) {
    SystemConfig sys = cfg.system;
    sys.seed = cfg.system.seed + static_cast<std::uint64_t>(t);
    TrialRow proto;
    proto.parameter = "bench";
    proto.value = sys.tx_antennas;
    proto.trial = t;
    const auto r = run_trial(sys, opt, proto);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (!a.out.empty()) write_rows(a.out, rows, true);

  std::map<std::string, std::vector<double>> times;
  for (const auto& r : rows)
    if (r.ok()) times[r.method].push_back(r.wall_time_s);
  for (const auto& m : opt.methods) {
    const auto& v = times[m];
    std::cout << m << ": " << v.size() << " ok trials, median wall time "
              << (v.empty() ? std::string("n/a") : csv_number(detail::median(v))) << " s\n";
  }
  return 0;
}

int cmd_verify(const CommonArgs& a, std::optional<int> trials, double perturb) {
  const ExperimentConfig cfg = resolve(a);
  VerifyOptions opt;
  opt.trials = trials.value_or(50);
  opt.system = cfg.system;
  opt.solver = cfg.solver;
  opt.perturb_power = perturb;
  opt.jobs = a.jobs;
  if (opt.trials == 0) std::cerr << "warning: zero trials requested; nothing was checked\n";
  const VerifySummary sum = run_verify(opt);
  const Json j = verify_summary_to_json(sum);
  std::cout << j.dump(2) << "\n";
  if (!a.out.empty()) write_json(a.out, j);
  for (const auto& c : sum.checks)
    if (c.failed)
      std::cerr << "FAIL " << c.name << ": " << c.failed << " of " << sum.trials << " (reproduce with --seed "
                << c.first_failing_seed << " --trials 1): " << c.first_failure << "\n";
  return sum.pass() ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint fronthaul compression and beamforming for networked ISAC"};
  app.require_subcommand(1);

  CommonArgs solve_args, sweep_args, verify_args, bench_args;

  auto* solve = app.add_subcommand("solve", "Solve one instance; writes solution.json, report.json, trace.log");
  add_common(solve, solve_args, "Output directory");
  std::string solve_method = "pd";
  bool certify_flag = false;
  solve->add_option("--method", solve_method, "pd, sdr or baseline")
      ->check(CLI::IsMember(method_names()));
  solve->add_flag("--certify", certify_flag, "Cross-check against the SDP relaxation");

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep; writes CSV");
  add_common(sweep, sweep_args, "CSV path (stdout when omitted)");
  std::optional<int> sweep_trials;
  std::vector<std::string> sweep_methods;
  std::string sweep_param;
  std::vector<double> sweep_values;
  bool no_timing = false;
  int sweep_reps = 1;
  sweep->add_option("--trials", sweep_trials, "Trials per grid point")->check(CLI::PositiveNumber);
  sweep->add_option("--method", sweep_methods, "Comma-separated methods")
      ->delimiter(',')
      ->check(CLI::IsMember(method_names()));
  sweep->add_option("--parameter", sweep_param, "gamma_s, C_dl, C_ul or antennas")
      ->check(CLI::IsMember(sweep_parameters()));
  sweep->add_option("--values", sweep_values, "Comma-separated grid")->delimiter(',');
  sweep->add_option("--reps", sweep_reps, "Timed repetitions per solve (median, after a warm-up)")
      ->check(CLI::Range(1, 100));
  sweep->add_flag("--no-timing", no_timing, "Leave wall-time cells empty");

  auto* verify = app.add_subcommand("verify", "Run the invariant and certification suite");
  add_common(verify, verify_args, "Also write the JSON summary to this path");
  std::optional<int> verify_trials;
  double perturb = 0.0;
  verify->add_option("--trials", verify_trials, "Random instances")->check(CLI::NonNegativeNumber);
  verify->add_option("--perturb-power", perturb, "Fault injection: scale PD powers by (1 + value)");

  auto* bench = app.add_subcommand("bench", "Median wall time per method");
  add_common(bench, bench_args, "Optional CSV path");
  std::optional<int> bench_trials, bench_reps;
  std::vector<std::string> bench_methods;
  bench->add_option("--trials", bench_trials, "Instances")->check(CLI::PositiveNumber);
  bench->add_option("--reps", bench_reps, "Timed repetitions per solve")->check(CLI::Range(1, 100));
  bench->add_option("--method", bench_methods, "Comma-separated methods")
      ->delimiter(',')
      ->check(CLI::IsMember(method_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*solve) return cmd_solve(solve_args, solve_method, certify_flag);
    if (*sweep) return cmd_sweep(sweep_args, sweep_trials, sweep_methods, sweep_param, sweep_values, !no_timing, sweep_reps);
    if (*verify) return cmd_verify(verify_args, verify_trials, perturb);
    if (*bench) return cmd_bench(bench_args, bench_trials, bench_methods, bench_reps);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
