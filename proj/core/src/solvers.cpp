#include "nmfmm/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <random>
#include <string>

#include "nmfmm/errors.hpp"
#include "nmfmm/linalg.hpp"
#include "nmfmm/squarem.hpp"

namespace nmfmm {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kInom: return "inom";
    case Algorithm::kParinom: return "parinom";
    case Algorithm::kMu: return "mu";
    case Algorithm::kFastHals: return "fast-hals";
    case Algorithm::kAccParinom: return "acc-parinom";
    case Algorithm::kAccMu: return "acc-mu";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::replace(lower.begin(), lower.end(), '_', '-');
  for (Algorithm a : kAllAlgorithms) {
    if (lower == to_string(a)) return a;
  }
  if (lower == "hals" || lower == "fasthals") return Algorithm::kFastHals;
  return std::nullopt;
}

bool requires_positive_factors(Algorithm a) {
  return a != Algorithm::kInom;
}

void normalize_factors(FactorPair& state) {
  const std::vector<double> norms = column_norms(state.w);
  for (std::size_t i = 0; i < state.w.rows(); ++i) {
    auto r = state.w.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (norms[j] > 0.0) r[j] /= norms[j];
    }
  }
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] > 0.0) {
      for (double& x : state.h.row(j)) x *= norms[j];
    }
  }
}

FactorPair initialize_factors(std::size_t n, std::size_t m, const SolverConfig& config) {
  if (config.rank == 0) throw ContractError("rank must be positive");
  auto check = [](const UniformRange& r, const char* which) {
    if (!(r.lo >= 0.0) || !(r.hi > r.lo)) {
      throw ContractError(std::string(which) + " init range must satisfy 0 <= lo < hi");
    }
  };
  check(config.w_init, "W");
  check(config.h_init, "H");

  std::mt19937_64 rng(config.seed);
  auto fill = [&](Matrix& m, const UniformRange& range) {
    std::uniform_real_distribution<double> dist(range.lo, range.hi);
    for (double& x : m.data()) x = std::max(dist(rng), config.positivity_floor);
  };
  FactorPair init{Matrix(n, config.rank), Matrix(config.rank, m)};
  fill(init.w, config.w_init);
  fill(init.h, config.h_init);
  init.w = normalize_columns(init.w);
  return init;
}

bool IterationTrace::is_monotone(double slack) const { return !first_increase(slack); }

std::optional<std::size_t> IterationTrace::first_increase(double slack) const {
  for (std::size_t k = 1; k < records.size(); ++k) {
    const double prev = records[k - 1].objective;
    if (records[k].objective > prev + slack * std::max(1.0, prev)) return k;
  }
  return std::nullopt;
}

namespace {

void require_conformable(const Matrix& v, const Matrix& w, const Matrix& h, std::string_view op) {
  require_shape(w.cols() == h.rows(), op, w, h);
  require_shape(v.rows() == w.rows(), op, v, w);
  require_shape(v.cols() == h.cols(), op, v, h);
}

void clamp_below(Matrix& m, double floor) {
  for (double& x : m.data()) x = std::max(x, floor);
}

// x <- x + (2 * num - 2 * den) / bound, optionally clamped at zero.
void gradient_step(Matrix& x, const Matrix& num, const Matrix& den, double bound,
                   Projection projection) {
  auto xs = x.data();
  auto ns = num.data();
  auto ds = den.data();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] += (2.0 * ns[i] - 2.0 * ds[i]) / bound;
    if (projection == Projection::kClamp && xs[i] < 0.0) xs[i] = 0.0;
  }
}

// x <- max(floor, x * root(num / den)), root being the fourth root or the identity.
template <bool FourthRoot>
void multiplicative_step(Matrix& x, const Matrix& num, const Matrix& den, double floor,
                         std::string_view op) {
  auto xs = x.data();
  auto ns = num.data();
  auto ds = den.data();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(ds[i] > 0.0)) {
      throw PositivityError(std::string(op) +
                            ": zero denominator entry; the positivity floor must be > 0");
    }
    double ratio = ns[i] / ds[i];
    if constexpr (FourthRoot) ratio = std::sqrt(std::sqrt(ratio));
    xs[i] = std::max(xs[i] * ratio, floor);
  }
}

void require_floor(double floor) {
  if (!(floor > 0.0)) throw PositivityError("positivity floor must be > 0");
}

}  // namespace

HalfStep inom_update_h(const Matrix& v, const Matrix& w, const Matrix& h, Projection projection) {
  require_conformable(v, w, h, "inom_update_h");
  const Matrix wtv = multiply_at_b(w, v);
  const Matrix wtw = gram_cols(w);
  // Scaling by 2 is exact, so this equals max_row_sum(2 W^T W).
  const double mu = 2.0 * max_row_sum(wtw);
  if (!(mu > 0.0)) throw DegenerateError("inom_update_h: W is identically zero", 0);
  const Matrix wtwh = multiply(wtw, h);
  HalfStep out{h, mu};
  gradient_step(out.value, wtv, wtwh, mu, projection);
  return out;
}

HalfStep inom_update_w(const Matrix& v, const Matrix& w, const Matrix& h, Projection projection) {
  require_conformable(v, w, h, "inom_update_w");
  const Matrix vht = multiply_a_bt(v, h);
  const Matrix hht = gram_rows(h);
  const double nu = 2.0 * max_row_sum(hht);
  if (!(nu > 0.0)) throw DegenerateError("inom_update_w: H is identically zero", 0);
  const Matrix whht = multiply(w, hht);
  HalfStep out{w, nu};
  gradient_step(out.value, vht, whht, nu, projection);
  return out;
}

FactorPair inom_iterate(const Matrix& v, const FactorPair& state, StepStats* stats) {
  HalfStep h = inom_update_h(v, state.w, state.h);
  HalfStep w = inom_update_w(v, state.w, h.value);
  if (stats) {
    stats->mu = h.bound;
    stats->nu = w.bound;
  }
  FactorPair next{std::move(w.value), std::move(h.value)};
  normalize_factors(next);
  return next;
}

Matrix parinom_update_w(const Matrix& v, const Matrix& w, const Matrix& h, double floor) {
  require_conformable(v, w, h, "parinom_update_w");
  require_floor(floor);
  const Matrix vht = multiply_a_bt(v, h);
  const Matrix whht = multiply(w, gram_rows(h));
  Matrix out = w;
  multiplicative_step<true>(out, vht, whht, floor, "parinom_update_w");
  return out;
}

Matrix parinom_update_h(const Matrix& v, const Matrix& w, const Matrix& h, double floor) {
  require_conformable(v, w, h, "parinom_update_h");
  require_floor(floor);
  const Matrix wtv = multiply_at_b(w, v);
  const Matrix wtwh = multiply(gram_cols(w), h);
  Matrix out = h;
  multiplicative_step<true>(out, wtv, wtwh, floor, "parinom_update_h");
  return out;
}

FactorPair parinom_iterate(const Matrix& v, const FactorPair& state, const StepOptions& options) {
  require_conformable(v, state.w, state.h, "parinom_iterate");
  FactorPair next{state.w, state.h};
  if (options.concurrent) {
    auto w_future = std::async(std::launch::async, [&] {
      return parinom_update_w(v, state.w, state.h, options.floor);
    });
    next.h = parinom_update_h(v, state.w, state.h, options.floor);
    next.w = w_future.get();
  } else {
    next.w = parinom_update_w(v, state.w, state.h, options.floor);
    next.h = parinom_update_h(v, state.w, state.h, options.floor);
  }
  normalize_factors(next);
  return next;
}

FactorPair mu_iterate(const Matrix& v, const FactorPair& state, const StepOptions& options) {
  require_conformable(v, state.w, state.h, "mu_iterate");
  require_floor(options.floor);
  FactorPair next{state.w, state.h};
  {
    const Matrix vht = multiply_a_bt(v, state.h);
    const Matrix whht = multiply(state.w, gram_rows(state.h));
    multiplicative_step<false>(next.w, vht, whht, options.floor, "mu_iterate (W)");
  }
  {
    const Matrix wtv = multiply_at_b(next.w, v);
    const Matrix wtwh = multiply(gram_cols(next.w), state.h);
    multiplicative_step<false>(next.h, wtv, wtwh, options.floor, "mu_iterate (H)");
  }
  normalize_factors(next);
  return next;
}

FactorPair fast_hals_iterate(const Matrix& v, const FactorPair& state, const StepOptions& options) {
  require_conformable(v, state.w, state.h, "fast_hals_iterate");
  require_floor(options.floor);
  const std::size_t n = v.rows(), m = v.cols(), r = state.w.cols();
  FactorPair next{state.w, state.h};
  Matrix& w = next.w;
  Matrix& h = next.h;

  // Rows of H: P = W^T V (stored r x m, i.e. P^T of the column form), Q = W^T W.
  {
    const Matrix p = multiply_at_b(w, v);
    const Matrix q = gram_cols(w);
    std::vector<double> hq(m);
    for (std::size_t j = 0; j < r; ++j) {
      const double qjj = q(j, j);
      if (!(qjj > 0.0)) {
        throw DegenerateError("fast_hals_iterate: component " + std::to_string(j) +
                                  " of W is zero",
                              j);
      }
      std::fill(hq.begin(), hq.end(), 0.0);
      for (std::size_t l = 0; l < r; ++l) {
        const double qlj = q(l, j);
        auto hl = h.row(l);
        for (std::size_t k = 0; k < m; ++k) hq[k] += qlj * hl[k];
      }
      auto hj = h.row(j);
      auto pj = p.row(j);
      for (std::size_t k = 0; k < m; ++k) {
        hj[k] = std::max(options.floor, hj[k] + (pj[k] - hq[k]) / qjj);
      }
    }
  }

  // Columns of W: R = V H^T, S = H H^T.
  {
    const Matrix rm = multiply_a_bt(v, h);
    const Matrix s = gram_rows(h);
    std::vector<double> ws(n);
    for (std::size_t j = 0; j < r; ++j) {
      const double sjj = s(j, j);
      if (!(sjj > 0.0)) {
        throw DegenerateError("fast_hals_iterate: component " + std::to_string(j) +
                                  " of H is zero",
                              j);
      }
      for (std::size_t i = 0; i < n; ++i) {
        auto wi = w.row(i);
        double acc = 0.0;
        for (std::size_t l = 0; l < r; ++l) acc += wi[l] * s(l, j);
        ws[i] = acc;
      }
      for (std::size_t i = 0; i < n; ++i) {
        w(i, j) = std::max(options.floor, w(i, j) + (rm(i, j) - ws[i]) / sjj);
      }
    }
  }

  normalize_factors(next);
  return next;
}

Solver::Solver(const Matrix& v, const SolverConfig& config, std::optional<FactorPair> init)
    : owned_(), v_(&v), config_(config), state_{Matrix(1, 1), Matrix(1, 1)} {
  if (!(config.tol > 0.0)) throw ContractError("tol must be > 0");
  if (config.max_iters == 0) throw ContractError("max_iters must be positive");
  if (!(config.positivity_floor > 0.0)) throw ContractError("positivity_floor must be > 0");
  if (config.rank == 0 || config.rank > std::min(v.rows(), v.cols())) {
    throw ContractError("rank " + std::to_string(config.rank) + " must be in [1, min(n, m)] for " +
                        v.shape_string() + " data");
  }
  if (!v.is_nonnegative()) throw ContractError("data matrix has negative entries");
  if (!v.all_finite()) throw ContractError("data matrix has non-finite entries");
  if (config.normalize_input) {
    owned_ = normalize_columns(v);
    v_ = &*owned_;
  }

  if (config.init == InitKind::kProvided || init) {
    if (!init) throw ContractError("init = provided but no initial factors were given");
    require_shape(init->w.rows() == v.rows() && init->w.cols() == config.rank,
                  "initial W", init->w, v);
    require_shape(init->h.rows() == config.rank && init->h.cols() == v.cols(), "initial H",
                  init->h, v);
    if (!init->w.is_nonnegative() || !init->h.is_nonnegative()) {
      throw ContractError("initial factors must be nonnegative");
    }
    state_ = std::move(*init);
    if (requires_positive_factors(config.algorithm)) {
      clamp_below(state_.w, config.positivity_floor);
      clamp_below(state_.h, config.positivity_floor);
    }
  } else {
    state_ = initialize_factors(v.rows(), v.cols(), config);
  }

  const double f0 = frobenius_residual(*v_, state_.w, state_.h);
  if (!std::isfinite(f0)) throw NumericalFailure("initial objective is not finite", 0);
  trace_.records.push_back(IterationRecord{0, f0, 0.0});
}

const IterationRecord& Solver::step() {
  const auto t0 = std::chrono::steady_clock::now();
  const StepOptions options{config_.positivity_floor, config_.concurrent};
  IterationRecord rec;
  rec.iter = trace_.records.size();
  const double prev = trace_.records.back().objective;

  switch (config_.algorithm) {
    case Algorithm::kInom: {
      StepStats stats;
      state_ = inom_iterate(*v_, state_, &stats);
      rec.mu = stats.mu;
      rec.nu = stats.nu;
      rec.objective = frobenius_residual(*v_, state_.w, state_.h);
      break;
    }
    case Algorithm::kParinom:
      state_ = parinom_iterate(*v_, state_, options);
      rec.objective = frobenius_residual(*v_, state_.w, state_.h);
      break;
    case Algorithm::kMu:
      state_ = mu_iterate(*v_, state_, options);
      rec.objective = frobenius_residual(*v_, state_.w, state_.h);
      break;
    case Algorithm::kFastHals:
      state_ = fast_hals_iterate(*v_, state_, options);
      rec.objective = frobenius_residual(*v_, state_.w, state_.h);
      break;
    case Algorithm::kAccParinom:
    case Algorithm::kAccMu: {
      const FixedPointMap map = config_.algorithm == Algorithm::kAccParinom
                                    ? parinom_map(options)
                                    : mu_map(options);
      SquaremOptions sq;
      sq.floor = config_.positivity_floor;
      SquaremResult res = squarem_step(*v_, state_, map, sq, prev);
      state_ = std::move(res.state);
      rec.objective = res.objective;
      rec.backtracks = res.accel.backtracks;
      break;
    }
  }

  elapsed_s_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.elapsed_s = elapsed_s_;
  if (!std::isfinite(rec.objective)) {
    throw NumericalFailure("objective became non-finite at iteration " + std::to_string(rec.iter),
                           static_cast<long>(rec.iter));
  }
  converged_ = prev == 0.0 || std::abs(rec.objective - prev) / prev <= config_.tol;
  trace_.records.push_back(rec);
  return trace_.records.back();
}

SolveResult Solver::finish() && {
  return SolveResult{std::move(state_), std::move(trace_), converged_};
}

SolveResult solve(const Matrix& v, const SolverConfig& config, std::optional<FactorPair> init) {
  Solver solver(v, config, std::move(init));
  while (solver.iterations() < config.max_iters) {
    solver.step();
    if (solver.converged()) break;
  }
  return std::move(solver).finish();
}

}  // namespace nmfmm
