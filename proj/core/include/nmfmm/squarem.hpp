#pragma once

#include <functional>
#include <optional>
#include <string>

#include "nmfmm/solvers.hpp"

namespace nmfmm {

/// A monotone fixed-point map of the NMF state together with the objective it descends.
struct FixedPointMap {
  std::string name;
  std::function<FactorPair(const Matrix&, const FactorPair&)> step;
  std::function<double(const Matrix&, const FactorPair&)> objective;
};

FixedPointMap parinom_map(const StepOptions& options = {});
FixedPointMap mu_map(const StepOptions& options = {});

struct AccelState {
  double alpha_w = -1.0;
  double alpha_h = -1.0;
  int backtracks = 0;
  /// Set when ||v|| was too small to extrapolate that factor.
  bool w_fallback = false;
  bool h_fallback = false;
  /// The extrapolated point was accepted but x2 was better and returned instead.
  bool used_x2 = false;
};

struct SquaremOptions {
  /// Floor applied after the max(0, .) projection of an extrapolated candidate.
  double floor = 1e-12;
  /// Overrides the computed step lengths (both factors); -1 reproduces x2.
  std::optional<double> forced_alpha;
  int max_backtracks = 1000;
  /// Below this ||v||_F a factor is not extrapolated.
  double degenerate_norm = 1e-15;
  /// Return x2 when it beats the accepted extrapolation. Off gives the bare
  /// backtracking rule, which only compares against f(x).
  bool keep_best = true;
};

struct SquaremResult {
  FactorPair state;
  AccelState accel;
  double objective = 0.0;
};

/// One squared-extrapolation step around `map`.
///
/// x1 = step(x), x2 = step(x1); per factor r = x1 - x, v = x2 - x1 - r,
/// alpha = -||r||_F / ||v||_F, candidate = max(0, x - 2 alpha r + alpha^2 v).
/// While f(candidate) > f(x) both alphas move halfway to -1. At alpha = -1 the
/// candidate is x2 itself, which the map's monotonicity makes acceptable. With
/// options.keep_best the result is x2 whenever f(x2) < f(accepted candidate).
SquaremResult squarem_step(const Matrix& v, const FactorPair& state, const FixedPointMap& map,
                           const SquaremOptions& options = {},
                           std::optional<double> current_objective = {});

/// x - 2 alpha r + alpha^2 v projected to [0, inf); exactly x2 when alpha == -1.
Matrix extrapolate(const Matrix& x, const Matrix& r, const Matrix& v, const Matrix& x2,
                   double alpha);

}  // namespace nmfmm
