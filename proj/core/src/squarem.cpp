#include "nmfmm/squarem.hpp"

#include <algorithm>
#include <cmath>

#include "nmfmm/errors.hpp"
#include "nmfmm/linalg.hpp"

namespace nmfmm {

namespace {

double residual_objective(const Matrix& v, const FactorPair& s) {
  return frobenius_residual(v, s.w, s.h);
}

Matrix difference(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  auto o = out.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= y[i];
  return out;
}

// v = x2 - x1 - r
Matrix curvature(const Matrix& x2, const Matrix& x1, const Matrix& r) {
  Matrix out = x2;
  auto o = out.data();
  auto a = x1.data();
  auto b = r.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = o[i] - a[i] - b[i];
  return out;
}

}  // namespace

FixedPointMap parinom_map(const StepOptions& options) {
  return FixedPointMap{
      "parinom",
      [options](const Matrix& v, const FactorPair& s) { return parinom_iterate(v, s, options); },
      residual_objective};
}

FixedPointMap mu_map(const StepOptions& options) {
  return FixedPointMap{
      "mu", [options](const Matrix& v, const FactorPair& s) { return mu_iterate(v, s, options); },
      residual_objective};
}

Matrix extrapolate(const Matrix& x, const Matrix& r, const Matrix& v, const Matrix& x2,
                   double alpha) {
  if (alpha == -1.0) return x2;
  Matrix out = x;
  auto o = out.data();
  auto rs = r.data();
  auto vs = v.data();
  const double a2 = alpha * alpha;
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = std::max(0.0, o[i] - 2.0 * alpha * rs[i] + a2 * vs[i]);
  }
  return out;
}

SquaremResult squarem_step(const Matrix& v, const FactorPair& state, const FixedPointMap& map,
                           const SquaremOptions& options,
                           std::optional<double> current_objective) {
  const double f0 = current_objective ? *current_objective : map.objective(v, state);

  const FactorPair x1 = map.step(v, state);
  const FactorPair x2 = map.step(v, x1);

  const Matrix r_w = difference(x1.w, state.w);
  const Matrix r_h = difference(x1.h, state.h);
  const Matrix v_w = curvature(x2.w, x1.w, r_w);
  const Matrix v_h = curvature(x2.h, x1.h, r_h);

  AccelState accel;
  const double nv_w = frobenius_norm(v_w);
  const double nv_h = frobenius_norm(v_h);
  accel.w_fallback = nv_w < options.degenerate_norm;
  accel.h_fallback = nv_h < options.degenerate_norm;
  accel.alpha_w = accel.w_fallback ? -1.0 : -frobenius_norm(r_w) / nv_w;
  accel.alpha_h = accel.h_fallback ? -1.0 : -frobenius_norm(r_h) / nv_h;
  if (options.forced_alpha) {
    accel.alpha_w = *options.forced_alpha;
    accel.alpha_h = *options.forced_alpha;
  }
  if (!std::isfinite(accel.alpha_w)) accel.alpha_w = -1.0;
  if (!std::isfinite(accel.alpha_h)) accel.alpha_h = -1.0;

  while (true) {
    const bool plain = accel.alpha_w == -1.0 && accel.alpha_h == -1.0;
    FactorPair candidate{extrapolate(state.w, r_w, v_w, x2.w, accel.alpha_w),
                         extrapolate(state.h, r_h, v_h, x2.h, accel.alpha_h)};
    if (!plain) {
      if (accel.alpha_w != -1.0) {
        for (double& x : candidate.w.data()) x = std::max(x, options.floor);
      }
      if (accel.alpha_h != -1.0) {
        for (double& x : candidate.h.data()) x = std::max(x, options.floor);
      }
      normalize_factors(candidate);
    }
    const double f = map.objective(v, candidate);
    // x2 is accepted unconditionally: the wrapped map is monotone.
    if (plain || f <= f0) {
      if (!plain && options.keep_best) {
        const double f2 = map.objective(v, x2);
        if (f2 < f) {
          accel.used_x2 = true;
          return SquaremResult{x2, accel, f2};
        }
      }
      return SquaremResult{std::move(candidate), accel, f};
    }
    if (++accel.backtracks > options.max_backtracks) {
      throw NumericalFailure("squarem_step: backtracking did not terminate", accel.backtracks);
    }
    accel.alpha_w = (accel.alpha_w - 1.0) / 2.0;
    accel.alpha_h = (accel.alpha_h - 1.0) / 2.0;
  }
}

}  // namespace nmfmm
