#pragma once

#include <cstddef>
#include <string_view>

#include "nmfmm/matrix.hpp"

namespace nmfmm {

// Products. All kernels accumulate in a fixed loop order, so results are
// bit-reproducible for identical inputs.

/// A * B
Matrix multiply(const Matrix& a, const Matrix& b);
/// A^T * B
Matrix multiply_at_b(const Matrix& a, const Matrix& b);
/// A * B^T
Matrix multiply_a_bt(const Matrix& a, const Matrix& b);
/// A^T * A
Matrix gram_cols(const Matrix& a);
/// A * A^T
Matrix gram_rows(const Matrix& a);

double frobenius_norm_sq(const Matrix& a);
double frobenius_norm(const Matrix& a);
/// Sum of elementwise products <A, B>.
double inner(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);

/// ||V - W H||_F^2.
double frobenius_residual(const Matrix& v, const Matrix& w, const Matrix& h);

/// Euclidean norm of each column.
std::vector<double> column_norms(const Matrix& m);

/// Returns M with every column scaled to unit Euclidean norm.
/// Throws DegenerateError naming the first all-zero column.
Matrix normalize_columns(const Matrix& m);

/// max_i sum_j A_ij for square, entrywise nonnegative A.
///
/// Placed on a diagonal this dominates any symmetric nonnegative A in the
/// positive-semidefinite order, since the Perron root is bounded by the
/// largest row sum.
double max_row_sum(const Matrix& a);

/// Throws ShapeError unless `cond`; the message names the operation and operands.
void require_shape(bool cond, std::string_view op, const Matrix& a, const Matrix& b);

}  // namespace nmfmm
