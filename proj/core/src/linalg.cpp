#include "nmfmm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nmfmm/errors.hpp"

namespace nmfmm {

void require_shape(bool cond, std::string_view op, const Matrix& a, const Matrix& b) {
  if (!cond) {
    throw ShapeError(std::string(op) + ": incompatible operands " + a.shape_string() + " and " +
                     b.shape_string());
  }
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  require_shape(a.cols() == b.rows(), "multiply", a, b);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix c(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c.row(i).data();
    const double* ai = a.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      const double* bp = b.row(p).data();
      for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
  return c;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  require_shape(a.rows() == b.rows(), "multiply_at_b", a, b);
  const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
  Matrix c(n, m);
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a.row(p).data();
    const double* bp = b.row(p).data();
    for (std::size_t i = 0; i < n; ++i) {
      const double api = ap[i];
      if (api == 0.0) continue;
      double* ci = c.row(i).data();
      for (std::size_t j = 0; j < m; ++j) ci[j] += api * bp[j];
    }
  }
  return c;
}

Matrix multiply_a_bt(const Matrix& a, const Matrix& b) {
  require_shape(a.cols() == b.cols(), "multiply_a_bt", a, b);
  const std::size_t n = a.rows(), m = b.rows(), k = a.cols();
  Matrix c(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = b.row(j).data();
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      c(i, j) = s;
    }
  }
  return c;
}

Matrix gram_cols(const Matrix& a) { return multiply_at_b(a, a); }

Matrix gram_rows(const Matrix& a) { return multiply_a_bt(a, a); }

double frobenius_norm_sq(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return s;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(frobenius_norm_sq(a)); }

double inner(const Matrix& a, const Matrix& b) {
  require_shape(a.same_shape(b), "inner", a, b);
  double s = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double max_abs(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s = std::max(s, std::abs(x));
  return s;
}

double frobenius_residual(const Matrix& v, const Matrix& w, const Matrix& h) {
  require_shape(w.cols() == h.rows(), "frobenius_residual (W, H)", w, h);
  require_shape(v.rows() == w.rows(), "frobenius_residual (V, W)", v, w);
  require_shape(v.cols() == h.cols(), "frobenius_residual (V, H)", v, h);
  const Matrix wh = multiply(w, h);
  double s = 0.0;
  auto x = v.data();
  auto y = wh.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

std::vector<double> column_norms(const Matrix& m) {
  std::vector<double> norms(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) norms[j] += r[j] * r[j];
  }
  for (double& x : norms) x = std::sqrt(x);
  return norms;
}

Matrix normalize_columns(const Matrix& m) {
  const std::vector<double> norms = column_norms(m);
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] == 0.0) {
      throw DegenerateError("normalize_columns: column " + std::to_string(j) + " is all zero", j);
    }
  }
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) r[j] /= norms[j];
  }
  return out;
}

double max_row_sum(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw ContractError("max_row_sum: matrix must be square, got " + a.shape_string());
  }
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double x : a.row(i)) {
      if (x < 0.0) throw ContractError("max_row_sum: matrix has a negative entry");
      s += x;
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace nmfmm
