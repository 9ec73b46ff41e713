#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "nmfmm/matrix.hpp"

namespace nmfmm::csv {

// Matrix text format:
//
//   rows,cols
//   a11,a12,...,a1c
//   ...
//
// Values are written with 17 significant digits so a write/read round trip is exact.

Matrix read_matrix(std::istream& in);
Matrix read_matrix(const std::filesystem::path& path);

void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

}  // namespace nmfmm::csv
