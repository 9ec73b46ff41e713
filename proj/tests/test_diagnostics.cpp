#include "doctest.h"
#include "nmfmm/diagnostics.hpp"
#include "nmfmm/linalg.hpp"
#include "support.hpp"

using namespace nmfmm;
using namespace testsupport;

namespace {

// Sum of per-monomial bounds over every term of ||V - W H||^2, written out
// index by index:
//   (WH)_ij^2 = sum_{k,l} W_ik H_kj W_il H_lj   (positive, degree 4)
//   -2 V_ij (WH)_ij = sum_k -2 V_ij W_ik H_kj   (negative, degree 2)
double four_index_surrogate(const Matrix& v, const FactorPair& a, const FactorPair& x) {
  const std::size_t n = v.rows(), m = v.cols(), r = a.w.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      total += v(i, j) * v(i, j);
      for (std::size_t k = 0; k < r; ++k) {
        const double rw = x.w(i, k) / a.w(i, k), rh = x.h(k, j) / a.h(k, j);
        const double anchor = a.w(i, k) * a.h(k, j);
        total += -2.0 * v(i, j) * anchor * (1.0 + std::log(rw) + std::log(rh));
        for (std::size_t l = 0; l < r; ++l) {
          const double rw2 = x.w(i, l) / a.w(i, l), rh2 = x.h(l, j) / a.h(l, j);
          const double p = anchor * a.w(i, l) * a.h(l, j);
          total += p * 0.25 *
                   (std::pow(rw, 4) + std::pow(rh, 4) + std::pow(rw2, 4) + std::pow(rh2, 4));
        }
      }
    }
  return total;
}

FactorPair perturb(const FactorPair& s, std::mt19937_64& rng, double sigma = 0.5) {
  std::normal_distribution<double> d(0.0, sigma);
  FactorPair out = s;
  for (double& x : out.w.data()) x *= std::exp(d(rng));
  for (double& x : out.h.data()) x *= std::exp(d(rng));
  return out;
}

}  // namespace

TEST_CASE("kkt_residual") {
  std::mt19937_64 rng(1);
  const FactorPair p = planted(4, 5, 2, rng);
  const KktReport exact = kkt_residual(naive_product(p.w, p.h), p.w, p.h);
  CHECK(exact.combined <= 1e-12);

  const KktReport scalar = kkt_residual(Matrix{{2}}, Matrix{{1}}, Matrix{{1}});
  CHECK(scalar.h_residual == 2.0);
  CHECK(scalar.w_residual == 2.0);
  CHECK(scalar.combined == 2.0);

  for (int t = 0; t < 20; ++t) {
    const Matrix v = uniform(6, 7, rng), w = uniform(6, 3, rng), h = uniform(3, 7, rng);
    const KktReport a = kkt_residual(v, w, h);
    const KktReport b = kkt_residual(v.transpose(), h.transpose(), w.transpose());
    CHECK(std::abs(a.w_residual - b.h_residual) <= 1e-12 * std::max(1.0, a.w_residual));
    CHECK(std::abs(a.h_residual - b.w_residual) <= 1e-12 * std::max(1.0, a.h_residual));
    CHECK(a.combined == std::max(a.w_residual, a.h_residual));
    const KktReport rel = kkt_residual_relative(v, w, h);
    CHECK(rel.combined <= a.combined);
  }
  CHECK_THROWS(kkt_residual(Matrix(3, 3), Matrix(3, 2), Matrix(3, 3)));
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const Matrix v = uniform(4, 5, rng), w = uniform(4, 2, rng), h = uniform(2, 5, rng);
    const Matrix gw = gradient_w(v, w, h);
    const Matrix fw = finite_difference([&](const Matrix& x) { return naive_residual(v, x, h); }, w);
    CHECK(max_abs_diff(gw, fw) <= 1e-6 * std::max(1.0, max_abs(gw)));
    const Matrix gh = gradient_h(v, w, h);
    const Matrix fh = finite_difference([&](const Matrix& x) { return naive_residual(v, w, x); }, h);
    CHECK(max_abs_diff(gh, fh) <= 1e-6 * std::max(1.0, max_abs(gh)));
  }
}

TEST_CASE("KKT residual drops after solving to tight tolerance") {
  std::mt19937_64 rng(3);
  for (Algorithm a : {Algorithm::kInom, Algorithm::kFastHals}) {
    for (int t = 0; t < 3; ++t) {
      const Matrix v = uniform(10, 12, rng);
      SolverConfig c;
      c.algorithm = a;
      c.rank = 3;
      c.tol = 1e-8;
      c.max_iters = 100000;
      c.seed = rng();
      const FactorPair x0 = initialize_factors(10, 12, c);
      const SolveResult r = solve(v, c, x0);
      const double before = kkt_residual(v, x0.w, x0.h).combined;
      const double after = kkt_residual(v, r.factors.w, r.factors.h).combined;
      CHECK(after <= 1e-2 * before);
    }
  }
}

TEST_CASE("INOM quadratic surrogates touch and dominate") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const Matrix v = uniform(4, 6, rng), w = uniform(4, 2, rng), h = uniform(2, 6, rng);
    const double f = naive_residual(v, w, h);
    CHECK(std::abs(inom_h_surrogate(v, w, h, h) - f) <= 1e-9 * std::max(1.0, f));
    CHECK(std::abs(inom_w_surrogate(v, w, h, w) - f) <= 1e-9 * std::max(1.0, f));
    for (int s = 0; s < 100; ++s) {
      const Matrix h2 = uniform(2, 6, rng, 0, 3), w2 = uniform(4, 2, rng, 0, 3);
      CHECK(inom_h_surrogate(v, w, h, h2) >= naive_residual(v, w, h2) - 1e-9);
      CHECK(inom_w_surrogate(v, w, h, w2) >= naive_residual(v, w2, h) - 1e-9);
    }
  }
}

TEST_CASE("PARINOM surrogate equals the four-index monomial expansion") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Matrix v = uniform(4, 5, rng);
    const FactorPair anchor{positive(4, 3, rng), positive(3, 5, rng)};
    const double f = naive_residual(v, anchor.w, anchor.h);
    CHECK(std::abs(parinom_surrogate(v, anchor, anchor) - f) <= 1e-9 * std::max(1.0, f));
    for (int s = 0; s < 50; ++s) {
      const FactorPair x = perturb(anchor, rng);
      const double g = parinom_surrogate(v, anchor, x);
      const double oracle = four_index_surrogate(v, anchor, x);
      CHECK(std::abs(g - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle)));
      CHECK(g >= naive_residual(v, x.w, x.h) - 1e-9);
    }
  }
}

TEST_CASE("MU auxiliary functions touch and dominate") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const Matrix v = uniform(5, 6, rng), w = positive(5, 2, rng), h = positive(2, 6, rng);
    const double f = naive_residual(v, w, h);
    CHECK(std::abs(mu_h_surrogate(v, w, h, h) - f) <= 1e-9 * std::max(1.0, f));
    CHECK(std::abs(mu_w_surrogate(v, w, h, w) - f) <= 1e-9 * std::max(1.0, f));
    for (int s = 0; s < 50; ++s) {
      const Matrix h2 = uniform(2, 6, rng, 0, 3), w2 = uniform(5, 2, rng, 0, 3);
      CHECK(mu_h_surrogate(v, w, h, h2) >= naive_residual(v, w, h2) - 1e-9);
      CHECK(mu_w_surrogate(v, w, h, w2) >= naive_residual(v, w2, h) - 1e-9);
    }
  }
}

TEST_CASE("monomial bounds on two variables") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0.05, 4.0), expo(0.1, 3.0);
  for (double c : {1.0, 2.5, -1.0, -0.3}) {
    for (int t = 0; t < 1000; ++t) {
      const double x[2] = {pos(rng), pos(rng)};
      const double a[2] = {pos(rng), pos(rng)};
      const double alpha[2] = {expo(rng), expo(rng)};
      const double direct = c * std::pow(x[0], alpha[0]) * std::pow(x[1], alpha[1]);
      CHECK(monomial(c, x, alpha) == doctest::Approx(direct));
      CHECK(monomial_bound(c, x, a, alpha) >= direct - 1e-9 * std::max(1.0, std::abs(direct)));
      const double at_anchor = c * std::pow(a[0], alpha[0]) * std::pow(a[1], alpha[1]);
      CHECK(monomial_bound(c, a, a, alpha) == doctest::Approx(at_anchor).epsilon(1e-12));
    }
  }
}

TEST_CASE("audit_majorization") {
  std::mt19937_64 rng(8);
  const Matrix v = uniform(4, 6, rng);
  const FactorPair s{positive(4, 2, rng), positive(2, 6, rng)};
  for (Algorithm a : kAllAlgorithms) {
    const MajorizationAudit none = audit_majorization(v, s, a, 0, 1);
    CHECK(none.passed);
    CHECK(none.samples == 0);
    CHECK(none.touching_error <= kTouchingTolerance);
    const MajorizationAudit full = audit_majorization(v, s, a, 100, 2);
    CHECK_MESSAGE(full.passed, to_string(a));
    CHECK(full.violations == 0);
    CHECK(full.worst_gap >= -kDominationTolerance);
  }
  const std::string kv = to_key_value(audit_majorization(v, s, Algorithm::kInom, 5, 3));
  CHECK(kv.find("audit.passed=true\n") != std::string::npos);
  CHECK(kv.find("audit.algorithm=inom\n") != std::string::npos);
  CHECK(to_key_value(kkt_residual(v, s.w, s.h)).find("kkt.combined=") != std::string::npos);
}

TEST_CASE("audit passes along solver trajectories") {
  std::mt19937_64 rng(9);
  for (Algorithm a : kAllAlgorithms) {
    const Matrix v = uniform(6, 7, rng);
    SolverConfig c;
    c.algorithm = a;
    c.rank = 2;
    c.seed = rng();
    Solver solver(v, c);
    for (int k = 0; k < 40; ++k) {
      solver.step();
      if (k % 10 != 0) continue;
      FactorPair st = solver.state();
      for (double& x : st.w.data()) x = std::max(x, 1e-12);
      for (double& x : st.h.data()) x = std::max(x, 1e-12);
      CHECK_MESSAGE(audit_majorization(v, st, a, 20, rng()).passed, to_string(a), " iter ", k);
    }
  }
}
