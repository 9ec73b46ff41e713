#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmfmm/solvers.hpp"

namespace nmfmm {

enum class MatrixKind { kDenseUniform, kSparse };
enum class StopRule {
  /// Stop at the first iteration with f_k <= target_fraction * f_0.
  kTargetFraction,
  /// Stop on the relative-change test of SolverConfig::tol.
  kConvergence,
};

struct BenchScenario {
  std::string name = "scenario";
  std::size_t n = 100;
  std::size_t m = 200;
  std::vector<std::size_t> ranks{1};
  MatrixKind kind = MatrixKind::kDenseUniform;
  /// Dense data is U[dense_lo, dense_hi].
  double dense_lo = 100.0;
  double dense_hi = 200.0;
  double sparsity = 0.7;
  StopRule stop = StopRule::kTargetFraction;
  double target_fraction = 0.7;
  double tol = 1e-6;
  std::size_t max_iters = 5000;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::vector<Algorithm> algorithms{kAllAlgorithms.begin(), kAllAlgorithms.end()};
  /// Keep every cell's full trace in the results (for plotting).
  bool keep_traces = false;
};

/// Throws ContractError unless target_fraction is in (0, 1], trials >= 1 and
/// the sizes and ranks are positive.
void validate(const BenchScenario& scenario);

struct TargetRun {
  double elapsed_s = 0.0;
  std::size_t iters = 0;
  bool achieved = false;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  IterationTrace trace;
};

/// Iterates until f_k <= target_fraction * f_0 (achieved) or max_iters.
/// elapsed_s is the solver time up to the stopping iteration; setup before
/// the first iteration is excluded.
TargetRun run_to_target(const Matrix& v, const SolverConfig& config, double target_fraction,
                        std::optional<FactorPair> init = {});

/// Iterates until the relative-change test passes (achieved) or max_iters.
TargetRun run_to_convergence(const Matrix& v, const SolverConfig& config,
                             std::optional<FactorPair> init = {});

struct TrialRow {
  std::string scenario;
  Algorithm algorithm = Algorithm::kInom;
  std::size_t rank = 0;
  std::size_t trial = 0;
  double elapsed_s = 0.0;
  std::size_t iters = 0;
  bool achieved = false;
  double final_objective = 0.0;
  /// Non-empty when the trial threw.
  std::string error;
};

struct SummaryRow {
  std::string scenario;
  Algorithm algorithm = Algorithm::kInom;
  std::size_t rank = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::size_t achieved = 0;
  double mean_elapsed_s = 0.0;
  double std_elapsed_s = 0.0;
  double mean_iters = 0.0;
  double std_iters = 0.0;
  double mean_final_objective = 0.0;
};

struct TraceSeries {
  std::string scenario;
  Algorithm algorithm = Algorithm::kInom;
  std::size_t rank = 0;
  std::size_t trial = 0;
  IterationTrace trace;
};

struct BenchResults {
  std::vector<TrialRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<TraceSeries> traces;
};

/// Runs every (trial, rank, algorithm) cell. Within a trial every algorithm
/// sees the same V, and for a given rank the same initial factors. A failing
/// cell is recorded in its row and the scenario continues.
BenchResults run_scenario(const BenchScenario& scenario);

/// Mean / sample standard deviation per (scenario, algorithm, rank) over the
/// rows that did not fail.
std::vector<SummaryRow> summarize(const std::vector<TrialRow>& rows);

/// Columns: scenario,algorithm,r,trial,elapsed_s,iters,achieved,final_objective
void write_results_csv(std::ostream& out, const std::vector<TrialRow>& rows);
/// Columns: scenario,algorithm,r,trials,failures,achieved,mean_elapsed_s,
/// std_elapsed_s,mean_iters,std_iters,mean_final_objective
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// Columns: iter,objective,elapsed_s
void write_trace_csv(std::ostream& out, const IterationTrace& trace);

/// Named experiment presets scaled by `scale` in (0, 1]: "sim1", "sim2-dense",
/// "sim2-sparse", "sim3", "sim3-sparse". Dimensions and ranks are multiplied by
/// `scale` and rounded (never below 1).
std::vector<BenchScenario> make_preset(std::string_view name, double scale, std::size_t trials,
                                       std::uint64_t seed);
std::vector<std::string_view> preset_names();

/// splitmix64 mix of (base, a, b); used for per-trial and per-rank seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace nmfmm
