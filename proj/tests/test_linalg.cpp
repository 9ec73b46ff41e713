#include <Eigen/Dense>
#include <sstream>

#include "doctest.h"
#include "nmfmm/csv.hpp"
#include "nmfmm/errors.hpp"
#include "nmfmm/linalg.hpp"
#include "support.hpp"

using namespace nmfmm;
using namespace testsupport;

TEST_CASE("matrix construction and shape checks") {
  Matrix a{{1, 2, 3}, {4, 5, 6}};
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a(1, 2) == 6);
  CHECK(a.transpose()(2, 1) == 6);
  CHECK_THROWS_AS(Matrix(0, 3), ShapeError);
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), ShapeError);
  CHECK(a.is_nonnegative());
  a(0, 0) = -1;
  CHECK_FALSE(a.is_nonnegative());
  CHECK(Matrix::identity(3)(1, 1) == 1.0);
}

TEST_CASE("products agree with a naive triple loop") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng() % 9, k = 1 + rng() % 7, m = 1 + rng() % 8;
    Matrix a = uniform(n, k, rng, -1, 1), b = uniform(k, m, rng, -1, 1);
    const Matrix ref = naive_product(a, b);
    CHECK(max_abs_diff(multiply(a, b), ref) <= 1e-12 * std::max(1.0, max_abs(ref)));
    CHECK(max_abs_diff(multiply_at_b(a.transpose(), b), ref) <= 1e-12 * std::max(1.0, max_abs(ref)));
    CHECK(max_abs_diff(multiply_a_bt(a, b.transpose()), ref) <= 1e-12 * std::max(1.0, max_abs(ref)));
    CHECK(max_abs_diff(gram_cols(a), naive_product(a.transpose(), a)) <= 1e-12 * n);
    CHECK(max_abs_diff(gram_rows(a), naive_product(a, a.transpose())) <= 1e-12 * k);
  }
  CHECK_THROWS_AS(multiply(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST_CASE("frobenius_residual") {
  SUBCASE("exact factorization gives zero") {
    std::mt19937_64 rng(1);
    Matrix w = uniform(4, 2, rng), h = uniform(2, 5, rng);
    CHECK(frobenius_residual(naive_product(w, h), w, h) <= 1e-28);
  }
  SUBCASE("identity against a rank-one factor") {
    CHECK(frobenius_residual(Matrix{{1, 0}, {0, 1}}, Matrix{{1}, {0}}, Matrix{{1, 0}}) == 1.0);
  }
  SUBCASE("random 3x4 against double-loop summation") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
      Matrix v = uniform(3, 4, rng), w = uniform(3, 2, rng), h = uniform(2, 4, rng);
      const double ref = naive_residual(v, w, h);
      CHECK(std::abs(frobenius_residual(v, w, h) - ref) <= 1e-12 * ref);
    }
  }
  SUBCASE("symmetric under transposition") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
      Matrix v = uniform(5, 7, rng), w = uniform(5, 3, rng), h = uniform(3, 7, rng);
      const double f = frobenius_residual(v, w, h);
      const double ft = frobenius_residual(v.transpose(), h.transpose(), w.transpose());
      CHECK(std::abs(f - ft) <= 1e-12 * f);
    }
  }
  SUBCASE("shape errors name the operands") {
    try {
      frobenius_residual(Matrix(3, 4), Matrix(3, 2), Matrix(3, 4));
      FAIL("expected a shape error");
    } catch (const ShapeError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("W") != std::string::npos);
      CHECK(msg.find("H") != std::string::npos);
    }
    CHECK_THROWS_AS(frobenius_residual(Matrix(2, 4), Matrix(3, 2), Matrix(2, 4)), ShapeError);
  }
}

TEST_CASE("normalize_columns") {
  const Matrix out = normalize_columns(Matrix{{3}, {4}});
  CHECK(out(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(out(1, 0) == doctest::Approx(0.8).epsilon(1e-15));

  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = uniform(5, 3, rng, 0.01, 10);
    const Matrix once = normalize_columns(a);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(column_norm(once, j) - 1.0) <= 1e-12);
      // direction preserved: ratio to the original is constant down the column
      const double s = once(0, j) / a(0, j);
      for (std::size_t i = 1; i < 5; ++i) CHECK(once(i, j) / a(i, j) == doctest::Approx(s));
    }
    CHECK(max_abs_diff(normalize_columns(once), once) <= 1e-15);
  }

  try {
    normalize_columns(Matrix{{1, 0, 2}, {1, 0, 2}});
    FAIL("expected a degenerate column");
  } catch (const DegenerateError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("max_row_sum") {
  CHECK(max_row_sum(Matrix{{2, 0}, {0, 2}}) == 2.0);
  const Matrix w{{1, 2}, {3, 4}};
  Matrix a = gram_cols(w);
  for (double& x : a.data()) x *= 2;
  CHECK(a == Matrix{{20, 28}, {28, 40}});
  CHECK(max_row_sum(a) == 68.0);
  CHECK(max_row_sum(Matrix(6, 6, 1.0)) == 6.0);
  CHECK_THROWS_AS(max_row_sum(Matrix(2, 3, 1.0)), ContractError);
  CHECK_THROWS_AS(max_row_sum(Matrix{{1, -1}, {0, 1}}), ContractError);
}

TEST_CASE("max_row_sum dominates in the PSD order (independent eigensolver)") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 19;
    Matrix a = uniform(n, n, rng);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        a(j, i) = a(i, j);
        e(i, j) = e(j, i) = -a(i, j);
      }
    const double lambda = max_row_sum(a);
    for (std::size_t i = 0; i < n; ++i) e(i, i) += lambda;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e, Eigen::EigenvaluesOnly);
    CHECK(solver.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("csv round trip and errors") {
  std::mt19937_64 rng(6);
  const Matrix a = uniform(4, 3, rng, 0, 1e6);
  std::stringstream ss;
  csv::write_matrix(ss, a);
  CHECK(csv::read_matrix(ss) == a);

  std::istringstream header_only("2,2\n1,2\n");
  try {
    csv::read_matrix(header_only);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream bad_value("2,2\n1,2\n3,abc\n");
  try {
    csv::read_matrix(bad_value);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream wrong_width("1,2\n1,2,3\n");
  CHECK_THROWS_AS(csv::read_matrix(wrong_width), ParseError);
  std::istringstream bad_header("x\n");
  CHECK_THROWS_AS(csv::read_matrix(bad_header), ParseError);
  CHECK(csv::format_double(0.1) == "0.1");
}
