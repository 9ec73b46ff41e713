#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "nmfmm/matrix.hpp"
#include "nmfmm/solvers.hpp"

namespace nmfmm {

/// grad_H ||V - W H||^2 = 2 W^T W H - 2 W^T V
Matrix gradient_h(const Matrix& v, const Matrix& w, const Matrix& h);
/// grad_W ||V - W H||^2 = 2 W H H^T - 2 V H^T
Matrix gradient_w(const Matrix& v, const Matrix& w, const Matrix& h);

/// First-order stationarity of the nonnegativity-constrained problem,
/// max |min(X, grad_X f)| per factor.
struct KktReport {
  double w_residual = 0.0;
  double h_residual = 0.0;
  double combined = 0.0;
};

KktReport kkt_residual(const Matrix& v, const Matrix& w, const Matrix& h);
/// Each residual divided by max(1, ||grad||_inf) of its factor.
KktReport kkt_residual_relative(const Matrix& v, const Matrix& w, const Matrix& h);

// --- Surrogates ------------------------------------------------------------
// Each g(. | anchor) touches f at the anchor and lies above it everywhere in
// its domain.

/// INOM H-block quadratic surrogate with diagonal curvature mu = max_row_sum(2 W^T W).
double inom_h_surrogate(const Matrix& v, const Matrix& w, const Matrix& h_anchor,
                        const Matrix& h);
/// INOM W-block quadratic surrogate with curvature nu = max_row_sum(2 H H^T).
double inom_w_surrogate(const Matrix& v, const Matrix& w_anchor, const Matrix& h,
                        const Matrix& w);

/// Joint PARINOM surrogate built from the monomial bounds: quartic AM-GM terms
/// for the positive part of ||W H||^2, logarithmic terms for -2 <V, W H>.
/// Requires strictly positive anchor and evaluation point.
double parinom_surrogate(const Matrix& v, const FactorPair& anchor, const FactorPair& x);

/// Lee-Seung auxiliary functions behind the multiplicative update (diagonal
/// curvature 2 (W^T W H) / H, resp. 2 (W H H^T) / W).
double mu_h_surrogate(const Matrix& v, const Matrix& w, const Matrix& h_anchor, const Matrix& h);
double mu_w_surrogate(const Matrix& v, const Matrix& w_anchor, const Matrix& h, const Matrix& w);

/// c * prod_j x_j^alpha_j over positive x.
double monomial(double c, std::span<const double> x, std::span<const double> alpha);

/// Upper bound on `monomial` that is tight at `anchor`:
///   c > 0: c * prod(anchor^alpha) * sum_j (alpha_j / |alpha|_1) (x_j / anchor_j)^|alpha|_1
///   c < 0: c * prod(anchor^alpha) * (1 + sum_j alpha_j ln(x_j / anchor_j))
/// Exponents must be nonnegative and not all zero.
double monomial_bound(double c, std::span<const double> x, std::span<const double> anchor,
                      std::span<const double> alpha);

struct MajorizationAudit {
  Algorithm algorithm = Algorithm::kInom;
  std::size_t samples = 0;
  /// Largest |g(x^k | x^k) - f(x^k)| / max(1, f(x^k)) over the surrogates checked.
  double touching_error = 0.0;
  /// Smallest g(x | x^k) - f(x) seen at the sampled points (0 with no samples).
  double worst_gap = 0.0;
  std::size_t violations = 0;
  bool passed = true;
};

inline constexpr double kTouchingTolerance = 1e-9;
inline constexpr double kDominationTolerance = 1e-9;

/// Checks the MM conditions of `algorithm`'s surrogate at `state`: touching at
/// the state itself and domination at `samples` random log-normal
/// perturbations of it. Accelerated variants audit their base map. Fast-HALS
/// is checked through its exact per-row quadratic model.
MajorizationAudit audit_majorization(const Matrix& v, const FactorPair& state,
                                     Algorithm algorithm, std::size_t samples,
                                     std::uint64_t seed);

/// Flat `key=value` lines, one per field.
std::string to_key_value(const KktReport& report);
std::string to_key_value(const MajorizationAudit& audit);

}  // namespace nmfmm
