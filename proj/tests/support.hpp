#pragma once
// Generators and independent reference implementations shared by the tests.
// Everything here is written with plain loops and does not call the library's
// kernels, so it can serve as an oracle for them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "nmfmm/matrix.hpp"
#include "nmfmm/solvers.hpp"

namespace testsupport {

using nmfmm::FactorPair;
using nmfmm::Matrix;

inline Matrix uniform(std::size_t n, std::size_t m, std::mt19937_64& rng, double lo = 0.0,
                      double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix a(n, m);
  for (double& x : a.data()) x = d(rng);
  return a;
}

inline Matrix positive(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  return uniform(n, m, rng, 0.1, 1.0);
}

inline Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double naive_residual(const Matrix& v, const Matrix& w, const Matrix& h) {
  double total = 0.0;
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) {
      double wh = 0.0;
      for (std::size_t k = 0; k < w.cols(); ++k) wh += w(i, k) * h(k, j);
      total += (v(i, j) - wh) * (v(i, j) - wh);
    }
  return total;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

inline double column_norm(const Matrix& a, std::size_t j) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Planted exact factorization: strictly positive W* (unit columns) and H*.
inline FactorPair planted(std::size_t n, std::size_t m, std::size_t r, std::mt19937_64& rng) {
  FactorPair p{positive(n, r, rng), positive(r, m, rng)};
  for (std::size_t j = 0; j < r; ++j) {
    const double norm = column_norm(p.w, j);
    for (std::size_t i = 0; i < n; ++i) p.w(i, j) /= norm;
    for (std::size_t k = 0; k < m; ++k) p.h(j, k) *= norm;
  }
  return p;
}

// Central finite difference of f with respect to every entry of x.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                                double step = 1e-5) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + step;
    const double up = f(probe);
    probe.data()[i] = orig - step;
    const double down = f(probe);
    probe.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * step);
  }
  return g;
}

inline bool monotone(const nmfmm::IterationTrace& trace) {
  const auto& r = trace.records;
  for (std::size_t k = 1; k < r.size(); ++k) {
    const double prev = r[k - 1].objective;
    if (r[k].objective > prev + 1e-9 * std::max(1.0, prev)) return false;
  }
  return true;
}

}  // namespace testsupport
