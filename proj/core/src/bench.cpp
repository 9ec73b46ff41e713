#include "nmfmm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

#include "nmfmm/csv.hpp"
#include "nmfmm/datagen.hpp"
#include "nmfmm/errors.hpp"
#include "nmfmm/linalg.hpp"

namespace nmfmm {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

void validate(const BenchScenario& s) {
  if (!(s.target_fraction > 0.0 && s.target_fraction <= 1.0)) {
    throw ContractError("target_fraction must be in (0, 1]");
  }
  if (s.trials == 0) throw ContractError("trials must be >= 1");
  if (s.n == 0 || s.m == 0) throw ContractError("scenario dimensions must be positive");
  if (s.ranks.empty()) throw ContractError("scenario needs at least one rank");
  for (std::size_t r : s.ranks) {
    if (r == 0 || r > std::min(s.n, s.m)) {
      throw ContractError("rank " + std::to_string(r) + " out of range for " +
                          std::to_string(s.n) + "x" + std::to_string(s.m));
    }
  }
  if (s.algorithms.empty()) throw ContractError("scenario needs at least one algorithm");
}

namespace {

TargetRun collect(Solver& solver, bool achieved) {
  TargetRun run;
  run.iters = solver.iterations();
  run.achieved = achieved;
  run.initial_objective = solver.initial_objective();
  run.final_objective = solver.objective();
  run.elapsed_s = solver.trace().records.back().elapsed_s;
  run.trace = solver.trace();
  return run;
}

}  // namespace

TargetRun run_to_target(const Matrix& v, const SolverConfig& config, double target_fraction,
                        std::optional<FactorPair> init) {
  if (!(target_fraction > 0.0 && target_fraction <= 1.0)) {
    throw ContractError("target_fraction must be in (0, 1]");
  }
  Solver solver(v, config, std::move(init));
  const double target = target_fraction * solver.initial_objective();
  bool achieved = false;
  while (solver.iterations() < config.max_iters) {
    if (solver.step().objective <= target) {
      achieved = true;
      break;
    }
  }
  return collect(solver, achieved);
}

TargetRun run_to_convergence(const Matrix& v, const SolverConfig& config,
                             std::optional<FactorPair> init) {
  Solver solver(v, config, std::move(init));
  while (solver.iterations() < config.max_iters) {
    solver.step();
    if (solver.converged()) break;
  }
  return collect(solver, solver.converged());
}

BenchResults run_scenario(const BenchScenario& scenario) {
  validate(scenario);
  BenchResults results;

  for (std::size_t trial = 0; trial < scenario.trials; ++trial) {
    const std::uint64_t data_seed = derive_seed(scenario.seed, trial);
    std::optional<Matrix> v;
    std::string data_error;
    try {
      Matrix raw = scenario.kind == MatrixKind::kDenseUniform
                       ? generate_dense_uniform(scenario.n, scenario.m, scenario.dense_lo,
                                                scenario.dense_hi, data_seed)
                       : generate_sparse(scenario.n, scenario.m, scenario.sparsity, data_seed);
      v = normalize_columns(raw);
    } catch (const Error& e) {
      data_error = e.what();
    }

    for (std::size_t rank : scenario.ranks) {
      SolverConfig config;
      config.rank = rank;
      config.tol = scenario.tol;
      config.max_iters = scenario.max_iters;
      config.seed = derive_seed(scenario.seed, trial, rank);
      std::optional<FactorPair> init;
      if (v) init = initialize_factors(scenario.n, scenario.m, config);

      for (Algorithm algorithm : scenario.algorithms) {
        TrialRow row{scenario.name, algorithm, rank, trial, 0.0, 0, false, 0.0, {}};
        if (!v) {
          row.error = data_error;
          results.rows.push_back(std::move(row));
          continue;
        }
        config.algorithm = algorithm;
        try {
          TargetRun run = scenario.stop == StopRule::kTargetFraction
                              ? run_to_target(*v, config, scenario.target_fraction, init)
                              : run_to_convergence(*v, config, init);
          row.elapsed_s = run.elapsed_s;
          row.iters = run.iters;
          row.achieved = run.achieved;
          row.final_objective = run.final_objective;
          if (scenario.keep_traces) {
            results.traces.push_back(
                TraceSeries{scenario.name, algorithm, rank, trial, std::move(run.trace)});
          }
        } catch (const Error& e) {
          row.error = e.what();
        }
        results.rows.push_back(std::move(row));
      }
    }
  }
  results.summary = summarize(results.rows);
  return results;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRow>& rows) {
  using Key = std::tuple<std::string, std::size_t, std::size_t>;
  std::map<Key, std::vector<const TrialRow*>> cells;
  std::vector<Key> order;
  for (const TrialRow& r : rows) {
    // First-appearance order keeps the summary aligned with the results file.
    Key key{r.scenario, static_cast<std::size_t>(r.algorithm), r.rank};
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }

  auto mean_std = [](const std::vector<double>& xs) {
    if (xs.empty()) return std::pair{0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };

  std::vector<SummaryRow> out;
  for (const Key& key : order) {
    const auto& members = cells[key];
    SummaryRow s;
    s.scenario = members.front()->scenario;
    s.algorithm = members.front()->algorithm;
    s.rank = members.front()->rank;
    s.trials = members.size();
    std::vector<double> times, iters, finals;
    for (const TrialRow* r : members) {
      if (!r->error.empty()) {
        ++s.failures;
        continue;
      }
      if (r->achieved) ++s.achieved;
      times.push_back(r->elapsed_s);
      iters.push_back(static_cast<double>(r->iters));
      finals.push_back(r->final_objective);
    }
    std::tie(s.mean_elapsed_s, s.std_elapsed_s) = mean_std(times);
    std::tie(s.mean_iters, s.std_iters) = mean_std(iters);
    s.mean_final_objective = mean_std(finals).first;
    out.push_back(std::move(s));
  }
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "scenario,algorithm,r,trial,elapsed_s,iters,achieved,final_objective\n";
  for (const TrialRow& r : rows) {
    out << r.scenario << ',' << to_string(r.algorithm) << ',' << r.rank << ',' << r.trial << ','
        << csv::format_double(r.elapsed_s) << ',' << r.iters << ','
        << (r.error.empty() ? (r.achieved ? "true" : "false") : "error") << ','
        << csv::format_double(r.final_objective) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "scenario,algorithm,r,trials,failures,achieved,mean_elapsed_s,std_elapsed_s,mean_iters,"
         "std_iters,mean_final_objective\n";
  for (const SummaryRow& s : rows) {
    out << s.scenario << ',' << to_string(s.algorithm) << ',' << s.rank << ',' << s.trials << ','
        << s.failures << ',' << s.achieved << ',' << csv::format_double(s.mean_elapsed_s) << ','
        << csv::format_double(s.std_elapsed_s) << ',' << csv::format_double(s.mean_iters) << ','
        << csv::format_double(s.std_iters) << ',' << csv::format_double(s.mean_final_objective)
        << '\n';
  }
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "iter,objective,elapsed_s\n";
  for (const IterationRecord& r : trace.records) {
    out << r.iter << ',' << csv::format_double(r.objective) << ','
        << csv::format_double(r.elapsed_s) << '\n';
  }
}

std::vector<std::string_view> preset_names() {
  return {"sim1", "sim2-dense", "sim2-sparse", "sim3", "sim3-sparse"};
}

std::vector<BenchScenario> make_preset(std::string_view name, double scale, std::size_t trials,
                                       std::uint64_t seed) {
  if (!(scale > 0.0 && scale <= 1.0)) throw ContractError("scale must be in (0, 1]");
  auto scaled = [scale](double x) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(x * scale)));
  };

  BenchScenario base;
  base.trials = trials;
  base.seed = seed;

  std::vector<BenchScenario> out;
  if (name == "sim1") {
    base.name = "sim1";
    base.n = scaled(100);
    base.m = scaled(200);
    base.ranks = {1};
    base.stop = StopRule::kConvergence;
    base.tol = 1e-6;
    base.max_iters = 5000;
    base.keep_traces = true;
    out.push_back(base);
  } else if (name == "sim2-dense" || name == "sim2-sparse") {
    base.name = std::string(name);
    base.n = scaled(10000);
    base.m = scaled(50000);
    base.kind = name == "sim2-dense" ? MatrixKind::kDenseUniform : MatrixKind::kSparse;
    base.ranks.clear();
    for (int r = 500; r <= 5000; r += 500) base.ranks.push_back(scaled(r));
    base.ranks.erase(std::unique(base.ranks.begin(), base.ranks.end()), base.ranks.end());
    out.push_back(base);
  } else if (name == "sim3" || name == "sim3-sparse") {
    base.n = scaled(1000);
    base.ranks = {scaled(100)};
    base.kind = name == "sim3" ? MatrixKind::kDenseUniform : MatrixKind::kSparse;
    for (int m = 100000; m <= 1000000; m += 100000) {
      BenchScenario s = base;
      s.m = scaled(m);
      s.name = std::string(name) + "-m" + std::to_string(s.m);
      out.push_back(std::move(s));
    }
  } else {
    throw ContractError("unknown preset '" + std::string(name) + "'");
  }
  for (const auto& s : out) validate(s);
  return out;
}

}  // namespace nmfmm
