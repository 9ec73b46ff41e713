#include "doctest.h"
#include "nmfmm/errors.hpp"
#include "nmfmm/linalg.hpp"
#include "nmfmm/squarem.hpp"
#include "support.hpp"

using namespace nmfmm;
using namespace testsupport;

TEST_CASE("fixed point: nothing to extrapolate") {
  std::mt19937_64 rng(1);
  const FactorPair p = planted(5, 6, 2, rng);
  const Matrix v = naive_product(p.w, p.h);
  const SquaremResult r = squarem_step(v, p, mu_map());
  CHECK(r.accel.w_fallback);
  CHECK(r.accel.h_fallback);
  CHECK(r.accel.backtracks == 0);
  CHECK(max_abs_diff(r.state.w, p.w) <= 1e-12);
  CHECK(max_abs_diff(r.state.h, p.h) <= 1e-12);
}

TEST_CASE("scalar instance with the MU map") {
  const Matrix v{{2}};
  const FactorPair x{Matrix{{1}}, Matrix{{1}}};
  const auto map = mu_map();
  const FactorPair two = map.step(v, map.step(v, x));
  CHECK(two.w == Matrix{{1}});
  CHECK(two.h == Matrix{{2}});
  const SquaremResult r = squarem_step(v, x, map);
  CHECK(r.state.w == two.w);
  CHECK(r.state.h == two.h);
  CHECK(r.objective == 0.0);
}

TEST_CASE("alpha = -1 reproduces two base steps exactly") {
  std::mt19937_64 rng(2);
  for (const auto& map : {parinom_map(), mu_map()}) {
    for (int t = 0; t < 10; ++t) {
      const Matrix v = uniform(7, 9, rng);
      const FactorPair x{positive(7, 3, rng), positive(3, 9, rng)};
      SquaremOptions o;
      o.forced_alpha = -1.0;
      const SquaremResult r = squarem_step(v, x, map, o);
      const FactorPair two = map.step(v, map.step(v, x));
      CHECK(r.state.w == two.w);
      CHECK(r.state.h == two.h);
      CHECK(r.accel.backtracks == 0);
    }
  }
  // the x - 2 alpha r + alpha^2 v form itself lands on x2 at alpha = -1
  const Matrix x{{1, 2}}, x1{{1.5, 1}}, x2{{1.7, 0.5}};
  Matrix r = x1, curv = x2;
  for (std::size_t i = 0; i < 2; ++i) {
    r.data()[i] -= x.data()[i];
    curv.data()[i] -= x1.data()[i] + r.data()[i];
  }
  Matrix by_formula = x;
  for (std::size_t i = 0; i < 2; ++i) by_formula.data()[i] += 2.0 * r.data()[i] + curv.data()[i];
  CHECK(max_abs_diff(by_formula, x2) <= 1e-15);
  CHECK(extrapolate(x, r, curv, x2, -1.0) == x2);
  // and near -1 the projected formula is continuous with it
  CHECK(max_abs_diff(extrapolate(x, r, curv, x2, -1.0 + 1e-9), x2) <= 1e-8);
}

TEST_CASE("backtracking halves the distance to -1") {
  std::mt19937_64 rng(3);
  int backtracked = 0;
  for (int t = 0; t < 40; ++t) {
    const Matrix v = uniform(10, 12, rng);
    FactorPair x{positive(10, 3, rng), positive(3, 12, rng)};
    const auto map = parinom_map();
    for (int k = 0; k < 20; ++k) {
      const FactorPair x1 = map.step(v, x);
      const FactorPair x2 = map.step(v, x1);
      Matrix rw = x1.w, vw = x2.w;
      for (std::size_t i = 0; i < rw.size(); ++i) {
        rw.data()[i] -= x.w.data()[i];
        vw.data()[i] -= x1.w.data()[i] + rw.data()[i];
      }
      const double alpha0 = -frobenius_norm(rw) / frobenius_norm(vw);
      const SquaremResult r = squarem_step(v, x, map);
      double expect = alpha0;
      for (int b = 0; b < r.accel.backtracks; ++b) {
        const double next = (expect - 1.0) / 2.0;
        CHECK(std::abs(next + 1.0) == doctest::Approx(std::abs(expect + 1.0) / 2.0));
        expect = next;
      }
      CHECK(r.accel.alpha_w == doctest::Approx(expect));
      if (r.accel.backtracks > 0) ++backtracked;
      CHECK(r.objective <= frobenius_residual(v, x.w, x.h));
      x = r.state;
    }
  }
  CHECK(backtracked > 0);
}

TEST_CASE("accelerated PARINOM stays below the plain two-step trajectory") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 5; ++t) {
    const Matrix v = uniform(10, 12, rng);
    SolverConfig c;
    c.rank = 3;
    c.seed = rng();
    const FactorPair x0 = initialize_factors(10, 12, c);
    const auto map = parinom_map();
    FactorPair plain = x0, acc = x0;
    double f_prev = frobenius_residual(v, x0.w, x0.h);
    for (int k = 0; k < 50; ++k) {
      plain = map.step(v, map.step(v, plain));
      const SquaremResult r = squarem_step(v, acc, map);
      acc = r.state;
      CHECK(r.objective <= f_prev);
      CHECK(r.objective <= frobenius_residual(v, plain.w, plain.h) + 1e-9);
      f_prev = r.objective;
    }
  }
}

TEST_CASE("keep_best returns x2 when it beats the accepted extrapolation") {
  std::mt19937_64 rng(6);
  int swapped = 0;
  for (int t = 0; t < 200; ++t) {
    const Matrix v = uniform(8, 9, rng);
    SolverConfig c;
    c.rank = 2;
    c.seed = rng();
    const FactorPair x = initialize_factors(8, 9, c);
    const auto map = parinom_map();
    const FactorPair two = map.step(v, map.step(v, x));
    const double f0 = frobenius_residual(v, x.w, x.h);
    const double f2 = frobenius_residual(v, two.w, two.h);
    SquaremOptions bare;
    bare.keep_best = false;
    const SquaremResult b = squarem_step(v, x, map, bare);
    const SquaremResult k = squarem_step(v, x, map);
    CHECK(b.objective <= f0);
    CHECK(k.objective <= std::min(b.objective, f2));
    if (k.accel.used_x2) {
      ++swapped;
      CHECK(k.state.w == two.w);
      CHECK(b.objective > f2);
    }
  }
  CHECK(swapped > 0);
}

TEST_CASE("backtracking limit surfaces as a numerical failure") {
  // A map whose objective rejects everything except its own two-step output
  // would terminate at alpha = -1; with the limit at zero the first rejection throws.
  std::mt19937_64 rng(5);
  const Matrix v = uniform(6, 6, rng);
  FixedPointMap map = parinom_map();
  const FactorPair x{positive(6, 2, rng), positive(2, 6, rng)};
  map.objective = [](const Matrix&, const FactorPair& s) { return s.w(0, 0) * 1e9 + 1.0; };
  SquaremOptions o;
  o.max_backtracks = 0;
  o.forced_alpha = -3.0;
  bool threw = false;
  try {
    const SquaremResult r = squarem_step(v, x, map, o, 0.0);
    (void)r;
  } catch (const NumericalFailure&) {
    threw = true;
  }
  CHECK(threw);
}
