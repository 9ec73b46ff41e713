#include "nmfmm/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "nmfmm/errors.hpp"

namespace nmfmm::csv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("cannot parse '" + std::string(field) + "' as a number", line_no);
  }
  return value;
}

}  // namespace

Matrix read_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError("empty input, expected 'rows,cols' header", 1);
  const auto header = split(line);
  if (header.size() != 2) throw ParseError("header must be 'rows,cols'", line_no);
  const auto rows = parse_number<std::size_t>(header[0], line_no);
  const auto cols = parse_number<std::size_t>(header[1], line_no);
  if (rows == 0 || cols == 0) throw ParseError("dimensions must be positive", line_no);

  std::vector<double> data;
  data.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!next_line()) {
      throw ParseError("expected " + std::to_string(rows) + " data rows, found " +
                           std::to_string(i),
                       line_no + 1);
    }
    const auto fields = split(line);
    if (fields.size() != cols) {
      throw ParseError("expected " + std::to_string(cols) + " values, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (auto f : fields) data.push_back(parse_number<double>(f, line_no));
  }
  if (next_line()) throw ParseError("unexpected data after last row", line_no);
  return Matrix(rows, cols, std::move(data));
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return read_matrix(in);
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ',' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ',';
      out << format_double(r[j]);
    }
    out << '\n';
  }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_matrix(out, m);
}

}  // namespace nmfmm::csv
