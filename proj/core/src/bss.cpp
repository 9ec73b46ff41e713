#include "nmfmm/bss.hpp"

#include <cmath>
#include <sstream>

#include "nmfmm/csv.hpp"
#include "nmfmm/errors.hpp"

namespace nmfmm {

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ContractError("pearson: length mismatch");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

MatchReport match_sources(const Matrix& recovered, const Matrix& truth) {
  if (recovered.cols() != truth.cols()) {
    throw ShapeError("match_sources: signals differ in length (" + recovered.shape_string() +
                     " vs " + truth.shape_string() + ")");
  }
  const std::size_t nr = recovered.rows(), nt = truth.rows();
  std::vector<double> corr(nr * nt);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nt; ++j) corr[i * nt + j] = pearson(recovered.row(i), truth.row(j));

  std::vector<bool> used_row(nr, false), used_src(nt, false);
  MatchReport report;
  report.matches.resize(nt);
  for (std::size_t j = 0; j < nt; ++j) report.matches[j].source = j;

  for (std::size_t step = 0; step < std::min(nr, nt); ++step) {
    double best = -2.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < nr; ++i) {
      if (used_row[i]) continue;
      for (std::size_t j = 0; j < nt; ++j) {
        if (!used_src[j] && corr[i * nt + j] > best) {
          best = corr[i * nt + j];
          bi = i;
          bj = j;
        }
      }
    }
    used_row[bi] = used_src[bj] = true;
    report.matches[bj] = SourceMatch{bj, bi, best};
  }
  double sum = 0.0;
  for (const auto& m : report.matches) sum += m.correlation;
  report.mean_correlation = sum / static_cast<double>(nt);
  return report;
}

Matrix normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double s = 0.0;
    for (double x : out.row(i)) s += x * x;
    if (s == 0.0) continue;
    s = std::sqrt(s);
    for (double& x : out.row(i)) x /= s;
  }
  return out;
}

BssRunResult run_bss(const BssScenario& scenario, const BssRunOptions& options) {
  BssData data = generate_bss(scenario);
  SolverConfig config;
  config.algorithm = options.algorithm;
  config.rank = scenario.num_sources;
  config.tol = options.tol;
  config.max_iters = options.max_iters;
  config.seed = options.seed;
  config.w_init = options.w_init;
  config.h_init = options.h_init;
  SolveResult solved = solve(data.observed, config);
  MatchReport match = match_sources(solved.factors.h, data.clean_sources);
  return BssRunResult{std::move(data), std::move(solved), std::move(match)};
}

std::string to_key_value(const MatchReport& report) {
  std::ostringstream out;
  for (const auto& m : report.matches) {
    out << "source" << m.source << ".recovered_row=" << m.recovered_row << '\n'
        << "source" << m.source << ".correlation=" << csv::format_double(m.correlation) << '\n';
  }
  out << "mean_correlation=" << csv::format_double(report.mean_correlation) << '\n';
  return out.str();
}

}  // namespace nmfmm
