#include "nmfmm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nmfmm/csv.hpp"
#include "nmfmm/errors.hpp"
#include "nmfmm/linalg.hpp"

namespace nmfmm {

namespace {

void axpy_into(Matrix& y, double a, const Matrix& x) {
  auto ys = y.data();
  auto xs = x.data();
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] += a * xs[i];
}

// sum_i weight_i * (a_i - b_i)^2
double weighted_sq_distance(const Matrix& a, const Matrix& b, const Matrix* weights) {
  auto as = a.data();
  auto bs = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < as.size(); ++i) {
    const double d = as[i] - bs[i];
    s += (weights ? weights->data()[i] : 1.0) * d * d;
  }
  return s;
}

// f(anchor) + <grad, x - anchor> + 0.5 * curvature-weighted ||x - anchor||^2
double quadratic_model(double f_anchor, const Matrix& grad, const Matrix& anchor, const Matrix& x,
                       double scalar_curvature, const Matrix* diag_curvature) {
  double lin = 0.0;
  auto g = grad.data();
  auto a = anchor.data();
  auto xs = x.data();
  for (std::size_t i = 0; i < g.size(); ++i) lin += g[i] * (xs[i] - a[i]);
  const double quad = diag_curvature ? weighted_sq_distance(x, anchor, diag_curvature)
                                     : scalar_curvature * weighted_sq_distance(x, anchor, nullptr);
  return f_anchor + lin + 0.5 * quad;
}

double residual_max_min(const Matrix& x, const Matrix& grad) {
  double r = 0.0;
  auto xs = x.data();
  auto g = grad.data();
  for (std::size_t i = 0; i < xs.size(); ++i) r = std::max(r, std::abs(std::min(xs[i], g[i])));
  return r;
}

void require_positive(const Matrix& m, const char* what) {
  if (!m.is_strictly_positive()) {
    throw ContractError(std::string(what) + " must be strictly positive");
  }
}

}  // namespace

Matrix gradient_h(const Matrix& v, const Matrix& w, const Matrix& h) {
  require_shape(v.rows() == w.rows() && w.cols() == h.rows() && v.cols() == h.cols(),
                "gradient_h", w, h);
  Matrix g = multiply(gram_cols(w), h);
  const Matrix wtv = multiply_at_b(w, v);
  for (double& x : g.data()) x *= 2.0;
  axpy_into(g, -2.0, wtv);
  return g;
}

Matrix gradient_w(const Matrix& v, const Matrix& w, const Matrix& h) {
  require_shape(v.rows() == w.rows() && w.cols() == h.rows() && v.cols() == h.cols(),
                "gradient_w", w, h);
  Matrix g = multiply(w, gram_rows(h));
  const Matrix vht = multiply_a_bt(v, h);
  for (double& x : g.data()) x *= 2.0;
  axpy_into(g, -2.0, vht);
  return g;
}

KktReport kkt_residual(const Matrix& v, const Matrix& w, const Matrix& h) {
  KktReport r;
  r.w_residual = residual_max_min(w, gradient_w(v, w, h));
  r.h_residual = residual_max_min(h, gradient_h(v, w, h));
  r.combined = std::max(r.w_residual, r.h_residual);
  return r;
}

KktReport kkt_residual_relative(const Matrix& v, const Matrix& w, const Matrix& h) {
  const Matrix gw = gradient_w(v, w, h);
  const Matrix gh = gradient_h(v, w, h);
  KktReport r;
  r.w_residual = residual_max_min(w, gw) / std::max(1.0, max_abs(gw));
  r.h_residual = residual_max_min(h, gh) / std::max(1.0, max_abs(gh));
  r.combined = std::max(r.w_residual, r.h_residual);
  return r;
}

double inom_h_surrogate(const Matrix& v, const Matrix& w, const Matrix& h_anchor,
                        const Matrix& h) {
  require_shape(h.same_shape(h_anchor), "inom_h_surrogate", h, h_anchor);
  const double mu = 2.0 * max_row_sum(gram_cols(w));
  return quadratic_model(frobenius_residual(v, w, h_anchor), gradient_h(v, w, h_anchor), h_anchor,
                         h, mu, nullptr);
}

double inom_w_surrogate(const Matrix& v, const Matrix& w_anchor, const Matrix& h,
                        const Matrix& w) {
  require_shape(w.same_shape(w_anchor), "inom_w_surrogate", w, w_anchor);
  const double nu = 2.0 * max_row_sum(gram_rows(h));
  return quadratic_model(frobenius_residual(v, w_anchor, h), gradient_w(v, w_anchor, h), w_anchor,
                         w, nu, nullptr);
}

double mu_h_surrogate(const Matrix& v, const Matrix& w, const Matrix& h_anchor, const Matrix& h) {
  require_shape(h.same_shape(h_anchor), "mu_h_surrogate", h, h_anchor);
  require_positive(h_anchor, "MU anchor H");
  Matrix k = multiply(gram_cols(w), h_anchor);
  auto ks = k.data();
  auto hs = h_anchor.data();
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = 2.0 * ks[i] / hs[i];
  return quadratic_model(frobenius_residual(v, w, h_anchor), gradient_h(v, w, h_anchor), h_anchor,
                         h, 0.0, &k);
}

double mu_w_surrogate(const Matrix& v, const Matrix& w_anchor, const Matrix& h, const Matrix& w) {
  require_shape(w.same_shape(w_anchor), "mu_w_surrogate", w, w_anchor);
  require_positive(w_anchor, "MU anchor W");
  Matrix k = multiply(w_anchor, gram_rows(h));
  auto ks = k.data();
  auto ws = w_anchor.data();
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = 2.0 * ks[i] / ws[i];
  return quadratic_model(frobenius_residual(v, w_anchor, h), gradient_w(v, w_anchor, h), w_anchor,
                         w, 0.0, &k);
}

double parinom_surrogate(const Matrix& v, const FactorPair& anchor, const FactorPair& x) {
  require_shape(anchor.w.same_shape(x.w), "parinom_surrogate (W)", anchor.w, x.w);
  require_shape(anchor.h.same_shape(x.h), "parinom_surrogate (H)", anchor.h, x.h);
  require_positive(anchor.w, "PARINOM anchor W");
  require_positive(anchor.h, "PARINOM anchor H");
  require_positive(x.w, "PARINOM point W");
  require_positive(x.h, "PARINOM point H");

  const Matrix& wi = anchor.w;
  const Matrix& hi = anchor.h;
  const Matrix whht = multiply(wi, gram_rows(hi));
  const Matrix wtwh = multiply(gram_cols(wi), hi);
  const Matrix vht = multiply_a_bt(v, hi);
  const Matrix wtv = multiply_at_b(wi, v);

  double g = frobenius_norm_sq(v) - 2.0 * inner(v, multiply(wi, hi));
  {
    auto a = x.w.data();
    auto a0 = wi.data();
    auto q = whht.data();
    auto p = vht.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double ratio = a[i] / a0[i];
      const double r2 = ratio * ratio;
      g += 0.5 * r2 * r2 * a0[i] * q[i] - 2.0 * std::log(ratio) * a0[i] * p[i];
    }
  }
  {
    auto b = x.h.data();
    auto b0 = hi.data();
    auto q = wtwh.data();
    auto p = wtv.data();
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double ratio = b[i] / b0[i];
      const double r2 = ratio * ratio;
      g += 0.5 * r2 * r2 * b0[i] * q[i] - 2.0 * std::log(ratio) * b0[i] * p[i];
    }
  }
  return g;
}

double monomial(double c, std::span<const double> x, std::span<const double> alpha) {
  if (x.size() != alpha.size()) throw ContractError("monomial: size mismatch");
  double p = c;
  for (std::size_t j = 0; j < x.size(); ++j) p *= std::pow(x[j], alpha[j]);
  return p;
}

double monomial_bound(double c, std::span<const double> x, std::span<const double> anchor,
                      std::span<const double> alpha) {
  if (x.size() != alpha.size() || anchor.size() != alpha.size()) {
    throw ContractError("monomial_bound: size mismatch");
  }
  double l1 = 0.0;
  for (double a : alpha) {
    if (a < 0.0) throw ContractError("monomial_bound: exponents must be nonnegative");
    l1 += a;
  }
  if (!(l1 > 0.0)) throw ContractError("monomial_bound: exponents are all zero");
  const double at_anchor = monomial(c, anchor, alpha);
  double s = 0.0;
  if (c > 0.0) {
    for (std::size_t j = 0; j < x.size(); ++j) s += alpha[j] / l1 * std::pow(x[j] / anchor[j], l1);
    return at_anchor * s;
  }
  s = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += alpha[j] * std::log(x[j] / anchor[j]);
  return at_anchor * s;
}

namespace {

struct AuditAccumulator {
  MajorizationAudit audit;
  double worst_gap = std::numeric_limits<double>::infinity();

  void touch(double g, double f) {
    audit.touching_error =
        std::max(audit.touching_error, std::abs(g - f) / std::max(1.0, std::abs(f)));
  }
  void dominate(double g, double f) {
    const double gap = g - f;
    worst_gap = std::min(worst_gap, gap);
    if (!(gap >= -kDominationTolerance)) ++audit.violations;
  }
};

Matrix perturb(const Matrix& m, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> z(0.0, sigma);
  Matrix out = m;
  for (double& x : out.data()) x *= std::exp(z(rng));
  return out;
}

}  // namespace

MajorizationAudit audit_majorization(const Matrix& v, const FactorPair& state,
                                     Algorithm algorithm, std::size_t samples,
                                     std::uint64_t seed) {
  AuditAccumulator acc;
  acc.audit.algorithm = algorithm;
  std::mt19937_64 rng(seed);
  constexpr double kSigma = 0.5;
  const Matrix& w = state.w;
  const Matrix& h = state.h;

  switch (algorithm) {
    case Algorithm::kInom: {
      const double f0 = frobenius_residual(v, w, h);
      acc.touch(inom_h_surrogate(v, w, h, h), f0);
      acc.touch(inom_w_surrogate(v, w, h, w), f0);
      for (std::size_t s = 0; s < samples; ++s) {
        const Matrix hp = perturb(h, rng, kSigma);
        acc.dominate(inom_h_surrogate(v, w, h, hp), frobenius_residual(v, w, hp));
        const Matrix wp = perturb(w, rng, kSigma);
        acc.dominate(inom_w_surrogate(v, w, h, wp), frobenius_residual(v, wp, h));
      }
      break;
    }
    case Algorithm::kParinom:
    case Algorithm::kAccParinom: {
      acc.touch(parinom_surrogate(v, state, state), frobenius_residual(v, w, h));
      for (std::size_t s = 0; s < samples; ++s) {
        const FactorPair x{perturb(w, rng, kSigma), perturb(h, rng, kSigma)};
        acc.dominate(parinom_surrogate(v, state, x), frobenius_residual(v, x.w, x.h));
      }
      break;
    }
    case Algorithm::kMu:
    case Algorithm::kAccMu: {
      const double f0 = frobenius_residual(v, w, h);
      acc.touch(mu_h_surrogate(v, w, h, h), f0);
      acc.touch(mu_w_surrogate(v, w, h, w), f0);
      for (std::size_t s = 0; s < samples; ++s) {
        const Matrix hp = perturb(h, rng, kSigma);
        acc.dominate(mu_h_surrogate(v, w, h, hp), frobenius_residual(v, w, hp));
        const Matrix wp = perturb(w, rng, kSigma);
        acc.dominate(mu_w_surrogate(v, w, h, wp), frobenius_residual(v, wp, h));
      }
      break;
    }
    case Algorithm::kFastHals: {
      // f restricted to one row of H is quadratic with curvature 2 ||w_j||^2,
      // so the per-row model is exact.
      const double f0 = frobenius_residual(v, w, h);
      const Matrix grad = gradient_h(v, w, h);
      const Matrix q = gram_cols(w);
      acc.touch(f0, f0);
      std::uniform_int_distribution<std::size_t> pick(0, h.rows() - 1);
      for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t j = pick(rng);
        const Matrix hp_full = perturb(h, rng, kSigma);
        Matrix hp = h;
        std::copy(hp_full.row(j).begin(), hp_full.row(j).end(), hp.row(j).begin());
        double model = f0;
        for (std::size_t k = 0; k < h.cols(); ++k) {
          const double d = hp(j, k) - h(j, k);
          model += grad(j, k) * d + q(j, j) * d * d;
        }
        acc.dominate(model, frobenius_residual(v, w, hp));
      }
      break;
    }
  }
  acc.audit.samples = samples;
  acc.audit.worst_gap = samples == 0 ? 0.0 : acc.worst_gap;
  acc.audit.passed = acc.audit.touching_error <= kTouchingTolerance && acc.audit.violations == 0;
  return acc.audit;
}

std::string to_key_value(const KktReport& report) {
  std::ostringstream out;
  out << "kkt.w_residual=" << csv::format_double(report.w_residual) << '\n'
      << "kkt.h_residual=" << csv::format_double(report.h_residual) << '\n'
      << "kkt.combined=" << csv::format_double(report.combined) << '\n';
  return out.str();
}

std::string to_key_value(const MajorizationAudit& audit) {
  std::ostringstream out;
  out << "audit.algorithm=" << to_string(audit.algorithm) << '\n'
      << "audit.samples=" << audit.samples << '\n'
      << "audit.touching_error=" << csv::format_double(audit.touching_error) << '\n'
      << "audit.worst_gap=" << csv::format_double(audit.worst_gap) << '\n'
      << "audit.violations=" << audit.violations << '\n'
      << "audit.passed=" << (audit.passed ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace nmfmm
