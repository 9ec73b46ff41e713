#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "nmfmm/matrix.hpp"

namespace nmfmm {

enum class Algorithm { kInom, kParinom, kMu, kFastHals, kAccParinom, kAccMu };

inline constexpr std::array<Algorithm, 6> kAllAlgorithms = {
    Algorithm::kInom,     Algorithm::kParinom,    Algorithm::kMu,
    Algorithm::kFastHals, Algorithm::kAccParinom, Algorithm::kAccMu};

std::string_view to_string(Algorithm a);
/// Accepts the names produced by to_string ("inom", "parinom", "mu",
/// "fast-hals", "acc-parinom", "acc-mu"), case-insensitively.
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// True for maps that divide by or take logarithms of factor entries.
bool requires_positive_factors(Algorithm a);

/// W (n x r) and H (r x m). After every full iteration W has unit-norm columns
/// and both factors are entrywise nonnegative.
struct FactorPair {
  Matrix w;
  Matrix h;
};

/// Scales every nonzero column of W to unit norm and multiplies the matching
/// row of H by the removed norm, so the product W H is unchanged. All-zero
/// columns (dead components) are left alone.
void normalize_factors(FactorPair& state);

enum class InitKind { kUniform01, kProvided };

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::kInom;
  std::size_t rank = 1;
  /// Stop once |f_{k+1} - f_k| / f_k <= tol.
  double tol = 1e-6;
  std::size_t max_iters = 5000;
  /// Floor applied after PARINOM, MU and Fast-HALS updates.
  double positivity_floor = 1e-12;
  std::uint64_t seed = 0;
  InitKind init = InitKind::kUniform01;
  /// Column-normalize V before solving.
  bool normalize_input = false;
  /// Run PARINOM's W and H updates on two threads.
  bool concurrent = true;
  UniformRange w_init{};
  UniformRange h_init{};
};

/// Random initial factors: W ~ U[w_init], H ~ U[h_init] drawn from a seeded
/// mt19937_64 (W first, row-major), entries floored at the positivity floor,
/// then W column-normalized. H is not rescaled.
FactorPair initialize_factors(std::size_t n, std::size_t m, const SolverConfig& config);

struct IterationRecord {
  std::size_t iter = 0;
  double objective = 0.0;
  double elapsed_s = 0.0;
  /// INOM step bounds; NaN for other algorithms.
  double mu = std::numeric_limits<double>::quiet_NaN();
  double nu = std::numeric_limits<double>::quiet_NaN();
  /// SQUAREM backtracking steps; -1 when not applicable.
  int backtracks = -1;
};

struct IterationTrace {
  std::vector<IterationRecord> records;

  /// f_{k+1} <= f_k + slack * max(1, f_k) for every consecutive pair.
  bool is_monotone(double slack = 1e-9) const;
  /// Index of the first record violating monotonicity, if any.
  std::optional<std::size_t> first_increase(double slack = 1e-9) const;
};

// ---------------------------------------------------------------------------
// Iteration maps. Each is a pure function of (V, state).

struct StepOptions {
  double floor = 1e-12;
  bool concurrent = true;
};

enum class Projection { kClamp, kNone };

struct HalfStep {
  Matrix value;
  /// Step-size bound (mu for the H update, nu for the W update).
  double bound;
};

/// INOM H update: mu = max_row_sum(2 W^T W),
/// H' = max(0, H + (2 W^T V - 2 W^T W H) / mu).
/// Projection::kNone returns the minimizer of the unconstrained quadratic surrogate.
HalfStep inom_update_h(const Matrix& v, const Matrix& w, const Matrix& h,
                       Projection projection = Projection::kClamp);

/// INOM W update: nu = max_row_sum(2 H H^T),
/// W' = max(0, W + (2 V H^T - 2 W H H^T) / nu).
HalfStep inom_update_w(const Matrix& v, const Matrix& w, const Matrix& h,
                       Projection projection = Projection::kClamp);

struct StepStats {
  double mu = std::numeric_limits<double>::quiet_NaN();
  double nu = std::numeric_limits<double>::quiet_NaN();
};

/// One INOM iteration: H update with W^k, W update with H^{k+1}, normalization.
FactorPair inom_iterate(const Matrix& v, const FactorPair& state, StepStats* stats = nullptr);

/// W' = W o ((V H^T) / (W H H^T))^(1/4), floored at `floor`.
Matrix parinom_update_w(const Matrix& v, const Matrix& w, const Matrix& h, double floor);
/// H' = H o ((W^T V) / (W^T W H))^(1/4), floored at `floor`.
Matrix parinom_update_h(const Matrix& v, const Matrix& w, const Matrix& h, double floor);

/// One PARINOM iteration. Both updates read only the incoming state, so they
/// run concurrently when options.concurrent is set; the result is identical
/// either way.
FactorPair parinom_iterate(const Matrix& v, const FactorPair& state,
                           const StepOptions& options = {});

/// One multiplicative-update iteration (W first, then H using the new W).
FactorPair mu_iterate(const Matrix& v, const FactorPair& state, const StepOptions& options = {});

/// One Fast-HALS sweep over the rows of H, then the columns of W.
FactorPair fast_hals_iterate(const Matrix& v, const FactorPair& state,
                             const StepOptions& options = {});

// ---------------------------------------------------------------------------
// Outer loop.

struct SolveResult {
  FactorPair factors;
  IterationTrace trace;
  bool converged = false;
};

/// Drives one algorithm one outer iteration at a time. Record 0 of the trace
/// is the initial state.
class Solver {
 public:
  /// `v` must outlive the solver unless config.normalize_input is set (a
  /// normalized copy is held then).
  Solver(const Matrix& v, const SolverConfig& config, std::optional<FactorPair> init = {});

  /// Runs one full iteration and appends its record. Throws NumericalFailure
  /// if the objective is not finite.
  const IterationRecord& step();

  /// Relative objective change of the most recent step is within tol.
  bool converged() const noexcept { return converged_; }
  std::size_t iterations() const noexcept { return trace_.records.size() - 1; }
  double objective() const noexcept { return trace_.records.back().objective; }
  double initial_objective() const noexcept { return trace_.records.front().objective; }

  const FactorPair& state() const noexcept { return state_; }
  const IterationTrace& trace() const noexcept { return trace_; }
  const Matrix& data() const noexcept { return *v_; }
  const SolverConfig& config() const noexcept { return config_; }

  /// Moves the results out; the solver must not be stepped afterwards.
  SolveResult finish() &&;

 private:
  std::optional<Matrix> owned_;
  const Matrix* v_;
  SolverConfig config_;
  FactorPair state_;
  IterationTrace trace_;
  bool converged_ = false;
  std::chrono::steady_clock::time_point start_;
  double elapsed_s_ = 0.0;
};

/// Iterates until the relative objective change is <= tol or max_iters is hit.
SolveResult solve(const Matrix& v, const SolverConfig& config,
                  std::optional<FactorPair> init = {});

}  // namespace nmfmm
