#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nmfmm/datagen.hpp"
#include "nmfmm/solvers.hpp"

namespace nmfmm {

/// Pearson correlation; 0 when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

struct SourceMatch {
  std::size_t source = 0;
  std::size_t recovered_row = 0;
  double correlation = 0.0;
};

struct MatchReport {
  /// One entry per true source, ordered by source index.
  std::vector<SourceMatch> matches;
  double mean_correlation = 0.0;
};

/// Greedy assignment: repeatedly pair the (recovered row, source) with the
/// highest remaining correlation. Both matrices have one signal per row.
MatchReport match_sources(const Matrix& recovered, const Matrix& truth);

/// Rows scaled to unit Euclidean norm (zero rows left as is).
Matrix normalize_rows(const Matrix& m);

struct BssRunOptions {
  Algorithm algorithm = Algorithm::kInom;
  std::uint64_t seed = 0;
  std::size_t max_iters = 1000;
  double tol = 1e-8;
  UniformRange w_init{100.0, 500.0};
  UniformRange h_init{200.0, 400.0};
};

struct BssRunResult {
  BssData data;
  SolveResult solve;
  MatchReport match;
};

/// Generates the scenario, factorizes the observed matrix at rank
/// num_sources (V is used as generated, without column normalization) and
/// matches the rows of H against the noiseless sources.
BssRunResult run_bss(const BssScenario& scenario, const BssRunOptions& options);

std::string to_key_value(const MatchReport& report);

}  // namespace nmfmm
