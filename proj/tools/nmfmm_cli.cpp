// nmfmm command-line front end: factorize, bench, bss, verify.
//
// Exit codes: 0 ok, 1 usage or input error, 2 numerical failure, 3 verification failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nmfmm/bench.hpp"
#include "nmfmm/bss.hpp"
#include "nmfmm/csv.hpp"
#include "nmfmm/datagen.hpp"
#include "nmfmm/diagnostics.hpp"
#include "nmfmm/errors.hpp"
#include "nmfmm/linalg.hpp"
#include "nmfmm/solvers.hpp"
#include "nmfmm/svg.hpp"
#include "nmfmm/verify.hpp"

namespace fs = std::filesystem;
using namespace nmfmm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerify = 3;

// Thrown for bad flag values that CLI11 cannot check on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Algorithm algorithm_flag(const std::string& name) {
  auto a = parse_algorithm(name);
  if (!a) throw UsageError("unknown algorithm '" + name + "'");
  return *a;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

// --- factorize --------------------------------------------------------------

struct FactorizeArgs {
  std::string input;
  std::size_t rank = 0;
  std::string algo = "inom";
  double tol = 1e-6;
  std::size_t max_iters = 5000;
  std::uint64_t seed = 0;
  bool normalize = false;
  std::string out_w, out_h, trace;
  bool verify = false;
  std::size_t audit_samples = 50;
};

int cmd_factorize(const FactorizeArgs& args) {
  const Matrix v = csv::read_matrix(fs::path(args.input));

  SolverConfig config;
  config.algorithm = algorithm_flag(args.algo);
  config.rank = args.rank;
  config.tol = args.tol;
  config.max_iters = args.max_iters;
  config.seed = args.seed;
  config.normalize_input = args.normalize;

  Solver solver(v, config);
  while (!solver.converged() && solver.iterations() < config.max_iters) solver.step();
  const Matrix data = solver.data();
  const SolveResult result = std::move(solver).finish();
  const FactorPair& f = result.factors;

  if (!args.out_w.empty()) {
    auto out = open_out(args.out_w);
    csv::write_matrix(out, f.w);
  }
  if (!args.out_h.empty()) {
    auto out = open_out(args.out_h);
    csv::write_matrix(out, f.h);
  }
  if (!args.trace.empty()) {
    auto out = open_out(args.trace);
    write_trace_csv(out, result.trace);
  }

  const auto& records = result.trace.records;
  std::cout << "algorithm=" << to_string(config.algorithm) << '\n'
            << "iterations=" << records.size() - 1 << '\n'
            << "converged=" << (result.converged ? "true" : "false") << '\n'
            << "initial_objective=" << csv::format_double(records.front().objective) << '\n'
            << "final_objective=" << csv::format_double(records.back().objective) << '\n'
            << "relative_objective="
            << csv::format_double(records.front().objective > 0.0
                                      ? records.back().objective / records.front().objective
                                      : 0.0)
            << '\n'
            << to_key_value(kkt_residual(data, f.w, f.h));

  if (!args.verify) return kExitOk;

  // Monotonicity of the whole run plus a surrogate audit at the final iterate.
  bool ok = true;
  if (auto bad = result.trace.first_increase()) {
    std::cout << "monotone=false\nmonotone.first_increase=" << *bad << '\n';
    ok = false;
  } else {
    std::cout << "monotone=true\n";
  }
  FactorPair audit_state = f;
  if (requires_positive_factors(config.algorithm)) {
    for (double& x : audit_state.w.data()) x = std::max(x, config.positivity_floor);
    for (double& x : audit_state.h.data()) x = std::max(x, config.positivity_floor);
  }
  const MajorizationAudit audit =
      audit_majorization(data, audit_state, config.algorithm, args.audit_samples, args.seed);
  std::cout << to_key_value(audit);
  ok = ok && audit.passed;
  return ok ? kExitOk : kExitVerify;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
  std::string preset;
  std::optional<double> scale;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::string out = "bench-out";
  std::vector<std::size_t> ranks;
  std::vector<std::string> algos;
};

void write_sim_plot(const fs::path& dir, const std::string& preset, const BenchResults& results) {
  std::vector<PlotSeries> series;
  for (const TraceSeries& t : results.traces) {
    if (t.trial != 0) continue;
    PlotSeries s;
    s.label = std::string(to_string(t.algorithm));
    for (const IterationRecord& r : t.trace.records) {
      s.x.push_back(r.elapsed_s);
      s.y.push_back(r.objective);
    }
    series.push_back(std::move(s));

    auto out = open_out(dir / (preset + "_trace_" + std::string(to_string(t.algorithm)) + ".csv"));
    write_trace_csv(out, t.trace);
  }
  if (series.empty()) return;
  PlotOptions options;
  options.title = preset + ": objective vs time";
  auto out = open_out(dir / (preset + "_objective.svg"));
  out << line_plot_svg(series, options);
}

int cmd_bench(const BenchArgs& args) {
  const double scale = args.scale.value_or(args.preset == "sim1" ? 1.0 : 0.05);
  if (!(scale > 0.0 && scale <= 1.0)) throw UsageError("--scale must be in (0, 1]");
  if (args.trials == 0) throw UsageError("--trials must be at least 1");

  std::vector<BenchScenario> scenarios = make_preset(args.preset, scale, args.trials, args.seed);
  std::vector<Algorithm> algorithms;
  for (const auto& a : args.algos) algorithms.push_back(algorithm_flag(a));
  for (BenchScenario& s : scenarios) {
    if (!args.ranks.empty()) s.ranks = args.ranks;
    if (!algorithms.empty()) s.algorithms = algorithms;
    validate(s);
  }

  const fs::path dir(args.out);
  BenchResults all;
  for (const BenchScenario& s : scenarios) {
    std::cerr << "running " << s.name << " (" << s.n << "x" << s.m << ", " << s.ranks.size()
              << " ranks, " << s.trials << " trials)\n";
    BenchResults r = run_scenario(s);
    all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
    for (auto& t : r.traces) all.traces.push_back(std::move(t));
  }
  all.summary = summarize(all.rows);

  {
    auto out = open_out(dir / (args.preset + "_results.csv"));
    write_results_csv(out, all.rows);
  }
  {
    auto out = open_out(dir / (args.preset + "_summary.csv"));
    write_summary_csv(out, all.summary);
  }
  write_sim_plot(dir, args.preset, all);
  write_summary_csv(std::cout, all.summary);

  bool failed = false;
  for (const TrialRow& row : all.rows) {
    if (row.error.empty()) continue;
    std::cerr << "error: " << row.scenario << " " << to_string(row.algorithm) << " r=" << row.rank
              << " trial=" << row.trial << ": " << row.error << '\n';
    failed = true;
  }
  return failed ? kExitNumerical : kExitOk;
}

// --- bss --------------------------------------------------------------------

struct BssArgs {
  double noise_var = 0.01;
  double sample_rate = 100.0;
  std::string algo = "inom";
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t max_iters = 1000;
  double tol = 1e-8;
};

int cmd_bss(const BssArgs& args) {
  if (args.noise_var < 0.0) throw UsageError("--noise-var must be nonnegative");
  if (!(args.sample_rate > 0.0)) throw UsageError("--sample-rate must be positive");

  BssScenario scenario;
  scenario.noise_variance = args.noise_var;
  scenario.sample_rate_hz = args.sample_rate;
  scenario.seed = args.seed;
  BssRunOptions options;
  options.algorithm = algorithm_flag(args.algo);
  options.seed = derive_seed(args.seed, 1);
  options.max_iters = args.max_iters;
  options.tol = args.tol;

  const BssRunResult r = run_bss(scenario, options);
  for (const auto& w : r.data.warnings) std::cerr << "warning: " << w << '\n';

  const std::string report = "algorithm=" + std::string(to_string(options.algorithm)) + "\n" +
                             "noise_variance=" + csv::format_double(args.noise_var) + "\n" +
                             "iterations=" + std::to_string(r.solve.trace.records.size() - 1) +
                             "\nfinal_objective=" +
                             csv::format_double(r.solve.trace.records.back().objective) + "\n" +
                             to_key_value(r.match);
  std::cout << report;

  if (!args.out_dir.empty()) {
    const fs::path dir(args.out_dir);
    auto write = [&](const char* name, const Matrix& m) {
      auto out = open_out(dir / name);
      csv::write_matrix(out, m);
    };
    write("sources.csv", r.data.clean_sources);
    write("mixing.csv", r.data.mixing);
    write("observed.csv", r.data.observed);
    write("W.csv", r.solve.factors.w);
    write("H.csv", r.solve.factors.h);

    // Recovered rows reordered to line up with the true sources, unit-norm.
    const Matrix h = normalize_rows(r.solve.factors.h);
    Matrix aligned(h.rows(), h.cols(), 0.0);
    for (const SourceMatch& m : r.match.matches) {
      auto src = h.row(m.recovered_row);
      std::copy(src.begin(), src.end(), aligned.row(m.source).begin());
    }
    write("recovered.csv", aligned);
    auto trace = open_out(dir / "trace.csv");
    write_trace_csv(trace, r.solve.trace);
    auto out = open_out(dir / "match.txt");
    out << report;
  }
  return kExitOk;
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::uint64_t seed = 1;
  bool quick = false;
  std::string fault;
};

int cmd_verify(const VerifyArgs& args) {
  VerifyOptions options;
  options.seed = args.seed;
  options.quick = args.quick;
  if (args.fault == "inom-sign-flip") {
    options.fault = Fault::kInomSignFlip;
  } else if (!args.fault.empty()) {
    throw UsageError("unknown fault '" + args.fault + "'");
  }
  const VerifyReport report = run_verification(options);
  std::cout << to_text(report);
  return report.passed() ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonnegative matrix factorization by majorization-minimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nmfmm 0.1.0");

  const std::string algo_help = "inom, parinom, mu, fast-hals, acc-parinom or acc-mu";

  FactorizeArgs fa;
  auto* factorize = app.add_subcommand("factorize", "Factorize a CSV matrix V ~ W H");
  factorize->add_option("input", fa.input, "Input matrix (CSV: 'rows,cols' header, then rows)")
      ->required()
      ->check(CLI::ExistingFile);
  factorize->add_option("-r,--rank", fa.rank, "Factorization rank")
      ->required()
      ->check(CLI::PositiveNumber);
  factorize->add_option("-a,--algo", fa.algo, algo_help)->capture_default_str();
  factorize->add_option("--tol", fa.tol, "Relative objective change that stops the run")
      ->capture_default_str();
  factorize->add_option("--max-iters", fa.max_iters, "Iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  factorize->add_option("--seed", fa.seed, "Seed for the initial factors")->capture_default_str();
  factorize->add_flag("--normalize", fa.normalize, "Column-normalize V before solving");
  factorize->add_option("--out-w", fa.out_w, "Write W as CSV");
  factorize->add_option("--out-h", fa.out_h, "Write H as CSV");
  factorize->add_option("--trace", fa.trace, "Write the iteration trace (iter,objective,elapsed_s)");
  factorize->add_flag("--verify", fa.verify,
                      "Check monotonicity and audit the surrogate at the result (exit 3 on failure)");
  factorize->add_option("--audit-samples", fa.audit_samples, "Random points for --verify")
      ->capture_default_str();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a benchmark preset and write CSV results");
  bench->add_option("-p,--preset", ba.preset, "sim1, sim2-dense, sim2-sparse, sim3 or sim3-sparse")
      ->required()
      ->check(CLI::IsMember({"sim1", "sim2-dense", "sim2-sparse", "sim3", "sim3-sparse"}));
  bench->add_option("--scale", ba.scale,
                    "Size factor in (0, 1] (default 1 for sim1, 0.05 otherwise)");
  bench->add_option("--trials", ba.trials, "Trials per cell")->capture_default_str();
  bench->add_option("--seed", ba.seed, "Base seed")->capture_default_str();
  bench->add_option("-o,--out", ba.out, "Output directory")->capture_default_str();
  bench->add_option("--ranks", ba.ranks, "Override the preset's rank list");
  bench->add_option("--algos", ba.algos, "Restrict to these algorithms");

  BssArgs sa;
  auto* bss = app.add_subcommand("bss", "Blind source separation of five synthetic signals");
  bss->add_option("--noise-var", sa.noise_var, "Variance of the additive source noise")
      ->capture_default_str();
  bss->add_option("--sample-rate", sa.sample_rate, "Samples per second")->capture_default_str();
  bss->add_option("-a,--algo", sa.algo, algo_help)->capture_default_str();
  bss->add_option("--seed", sa.seed, "Seed for data and initialization")->capture_default_str();
  bss->add_option("--out-dir", sa.out_dir, "Write sources, factors and the match report here");
  bss->add_option("--max-iters", sa.max_iters, "Iteration cap")->capture_default_str();
  bss->add_option("--tol", sa.tol, "Relative objective change that stops the run")
      ->capture_default_str();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run the invariant suites");
  verify->add_option("--seed", va.seed, "Seed")->capture_default_str();
  verify->add_flag("--quick", va.quick, "Fewer samples, same suites");
  verify->add_option("--inject-fault", va.fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*factorize) return cmd_factorize(fa);
    if (*bench) return cmd_bench(ba);
    if (*bss) return cmd_bss(sa);
    if (*verify) return cmd_verify(va);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: invalid CSV: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure at iteration " << e.iteration() << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const PositivityError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DegenerateError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    // Shape and contract errors come from bad inputs or flags.
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
