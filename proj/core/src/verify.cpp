#include "nmfmm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "nmfmm/bench.hpp"
#include "nmfmm/csv.hpp"
#include "nmfmm/diagnostics.hpp"
#include "nmfmm/errors.hpp"
#include "nmfmm/linalg.hpp"
#include "nmfmm/solvers.hpp"
#include "nmfmm/squarem.hpp"

namespace nmfmm {

namespace {

using StepFn = std::function<FactorPair(const Matrix&, const FactorPair&)>;

Matrix generate_uniform(std::size_t n, std::size_t m, std::mt19937_64& rng, double lo = 0.0,
                        double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix out(n, m);
  for (double& x : out.data()) x = dist(rng);
  return out;
}

struct Instance {
  Matrix v;
  FactorPair state;
  std::size_t rank;
  std::uint64_t seed;
};

Instance random_instance(std::uint64_t seed, std::size_t max_n, std::size_t max_m,
                         std::size_t max_r) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dn(3, max_n), dm(3, max_m);
  const std::size_t n = dn(rng), m = dm(rng);
  std::uniform_int_distribution<std::size_t> dr(1, std::min({max_r, n - 1, m - 1}));
  const std::size_t r = dr(rng);
  Matrix v = normalize_columns(generate_uniform(n, m, rng));
  SolverConfig config;
  config.rank = r;
  config.seed = rng();
  return Instance{std::move(v), initialize_factors(n, m, config), r, seed};
}

class Suite {
 public:
  explicit Suite(std::string name) { result_.name = std::move(name); }

  void check(bool ok, const std::function<std::string()>& describe) {
    ++result_.checks;
    if (ok) return;
    if (result_.failures++ == 0) result_.counterexample = describe();
  }
  SuiteResult take() && { return std::move(result_); }

 private:
  SuiteResult result_;
};

std::string describe(const Instance& inst) {
  std::ostringstream out;
  out << "instance.seed=" << inst.seed << "\ninstance.shape=" << inst.v.shape_string()
      << "\ninstance.rank=" << inst.rank << '\n';
  return out.str();
}

FactorPair inom_sign_flipped(const Matrix& v, const FactorPair& s) {
  // H + d is the correct pre-projection point; H - d walks uphill.
  auto reflect = [](const Matrix& x, const Matrix& stepped) {
    Matrix out = x;
    auto o = out.data();
    auto t = stepped.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::max(0.0, 2.0 * o[i] - t[i]);
    return out;
  };
  Matrix h = reflect(s.h, inom_update_h(v, s.w, s.h, Projection::kNone).value);
  Matrix w = reflect(s.w, inom_update_w(v, s.w, h, Projection::kNone).value);
  FactorPair next{std::move(w), std::move(h)};
  normalize_factors(next);
  return next;
}

std::vector<std::pair<Algorithm, StepFn>> iteration_maps(Fault fault) {
  const StepOptions options{};
  std::vector<std::pair<Algorithm, StepFn>> maps;
  if (fault == Fault::kInomSignFlip) {
    maps.emplace_back(Algorithm::kInom, inom_sign_flipped);
  } else {
    maps.emplace_back(Algorithm::kInom,
                      [](const Matrix& v, const FactorPair& s) { return inom_iterate(v, s); });
  }
  maps.emplace_back(Algorithm::kParinom, [options](const Matrix& v, const FactorPair& s) {
    return parinom_iterate(v, s, options);
  });
  maps.emplace_back(Algorithm::kMu, [options](const Matrix& v, const FactorPair& s) {
    return mu_iterate(v, s, options);
  });
  maps.emplace_back(Algorithm::kFastHals, [options](const Matrix& v, const FactorPair& s) {
    return fast_hals_iterate(v, s, options);
  });
  maps.emplace_back(Algorithm::kAccParinom, [options](const Matrix& v, const FactorPair& s) {
    return squarem_step(v, s, parinom_map(options)).state;
  });
  maps.emplace_back(Algorithm::kAccMu, [options](const Matrix& v, const FactorPair& s) {
    return squarem_step(v, s, mu_map(options)).state;
  });
  return maps;
}

SuiteResult monotonicity_suite(const VerifyOptions& opt) {
  Suite suite("monotonicity");
  const std::size_t instances = opt.quick ? 4 : 12;
  const std::size_t iters = opt.quick ? 15 : 40;
  for (std::size_t t = 0; t < instances; ++t) {
    const Instance inst = random_instance(derive_seed(opt.seed, 100, t), 20, 25, 6);
    for (const auto& [algorithm, step] : iteration_maps(opt.fault)) {
      FactorPair s = inst.state;
      double f = frobenius_residual(inst.v, s.w, s.h);
      for (std::size_t k = 1; k <= iters; ++k) {
        s = step(inst.v, s);
        const double next = frobenius_residual(inst.v, s.w, s.h);
        const double prev = f;
        suite.check(next <= prev + 1e-9 * std::max(1.0, prev), [&, alg = algorithm] {
          std::ostringstream out;
          out << "algorithm=" << to_string(alg) << '\n'
              << describe(inst) << "iteration=" << k << "\nobjective.before="
              << csv::format_double(prev) << "\nobjective.after=" << csv::format_double(next)
              << '\n';
          return out.str();
        });
        f = next;
      }
    }
  }
  return std::move(suite).take();
}

SuiteResult majorization_suite(const VerifyOptions& opt) {
  Suite suite("majorization");
  const std::size_t instances = opt.quick ? 3 : 10;
  const std::size_t samples = opt.quick ? 10 : 50;
  const std::size_t iters = opt.quick ? 10 : 30;
  for (std::size_t t = 0; t < instances; ++t) {
    const Instance inst = random_instance(derive_seed(opt.seed, 200, t), 12, 15, 4);
    for (const auto& [algorithm, step] : iteration_maps(Fault::kNone)) {
      if (algorithm == Algorithm::kAccParinom || algorithm == Algorithm::kAccMu) continue;
      FactorPair s = inst.state;
      for (std::size_t k = 0; k <= iters; ++k) {
        if (k % 10 == 0) {
          const auto audit = audit_majorization(inst.v, s, algorithm, samples,
                                                derive_seed(opt.seed, t, k));
          suite.check(audit.passed, [&] { return describe(inst) + to_key_value(audit); });
        }
        s = step(inst.v, s);
      }
    }
  }
  return std::move(suite).take();
}

SuiteResult fixed_point_suite(const VerifyOptions& opt) {
  Suite suite("fixed-point");
  const std::size_t instances = opt.quick ? 3 : 10;
  for (std::size_t t = 0; t < instances; ++t) {
    std::mt19937_64 rng(derive_seed(opt.seed, 300, t));
    std::uniform_int_distribution<std::size_t> dn(4, 15);
    const std::size_t n = dn(rng), m = dn(rng);
    const std::size_t r = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    FactorPair planted{generate_uniform(n, r, rng, 0.5, 1.5), generate_uniform(r, m, rng, 0.5, 1.5)};
    normalize_factors(planted);
    const Matrix v = multiply(planted.w, planted.h);
    for (const auto& [algorithm, step] : iteration_maps(Fault::kNone)) {
      if (algorithm == Algorithm::kAccParinom || algorithm == Algorithm::kAccMu) continue;
      const FactorPair next = step(v, planted);
      double diff = 0.0;
      for (std::size_t i = 0; i < next.w.size(); ++i)
        diff = std::max(diff, std::abs(next.w.data()[i] - planted.w.data()[i]));
      for (std::size_t i = 0; i < next.h.size(); ++i)
        diff = std::max(diff, std::abs(next.h.data()[i] - planted.h.data()[i]));
      suite.check(diff <= 1e-12, [&, alg = algorithm] {
        std::ostringstream out;
        out << "algorithm=" << to_string(alg) << "\nshape=" << v.shape_string() << "\nrank=" << r
            << "\nmax_abs_change=" << csv::format_double(diff) << '\n';
        return out.str();
      });
    }
  }
  return std::move(suite).take();
}

SuiteResult psd_bound_suite(const VerifyOptions& opt) {
  Suite suite("psd-bound");
  const std::size_t matrices = opt.quick ? 50 : 200;
  const std::size_t vectors = opt.quick ? 20 : 100;
  std::mt19937_64 rng(derive_seed(opt.seed, 400));
  std::uniform_int_distribution<std::size_t> dsize(2, 20);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t t = 0; t < matrices; ++t) {
    const std::size_t n = dsize(rng);
    Matrix a = generate_uniform(n, n, rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);
    const double bound = max_row_sum(a);
    for (std::size_t s = 0; s < vectors; ++s) {
      std::vector<double> x(n);
      double xx = 0.0;
      for (double& xi : x) {
        xi = gauss(rng);
        xx += xi * xi;
      }
      double xax = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) xax += x[i] * a(i, j) * x[j];
      const double q = bound * xx - xax;
      suite.check(q >= -1e-9 * xx, [&] {
        std::ostringstream out;
        out << "size=" << n << "\nmax_row_sum=" << csv::format_double(bound)
            << "\nquadratic_form=" << csv::format_double(q) << '\n';
        return out.str();
      });
    }
  }
  return std::move(suite).take();
}

SuiteResult parallel_suite(const VerifyOptions& opt) {
  Suite suite("parallel-equivalence");
  const std::size_t instances = opt.quick ? 5 : 20;
  for (std::size_t t = 0; t < instances; ++t) {
    const Instance inst = random_instance(derive_seed(opt.seed, 500, t), 30, 40, 8);
    const FactorPair a = parinom_iterate(inst.v, inst.state, StepOptions{1e-12, true});
    const FactorPair b = parinom_iterate(inst.v, inst.state, StepOptions{1e-12, false});
    suite.check(a.w == b.w && a.h == b.h, [&] { return describe(inst); });
  }
  return std::move(suite).take();
}

SuiteResult kkt_suite(const VerifyOptions& opt) {
  Suite suite("kkt-decrease");
  const std::size_t instances = opt.quick ? 2 : 10;
  for (std::size_t t = 0; t < instances; ++t) {
    std::mt19937_64 rng(derive_seed(opt.seed, 600, t));
    const Matrix v = normalize_columns(generate_uniform(10, 12, rng));
    for (Algorithm algorithm : {Algorithm::kInom, Algorithm::kFastHals}) {
      SolverConfig config;
      config.algorithm = algorithm;
      config.rank = 3;
      config.tol = 1e-8;
      config.max_iters = 100000;
      config.seed = rng();
      const FactorPair init = initialize_factors(v.rows(), v.cols(), config);
      const KktReport before = kkt_residual(v, init.w, init.h);
      const SolveResult res = solve(v, config, init);
      const KktReport after = kkt_residual(v, res.factors.w, res.factors.h);
      suite.check(after.combined <= 1e-2 * before.combined, [&] {
        std::ostringstream out;
        out << "algorithm=" << to_string(algorithm) << "\ninstance=" << t
            << "\nkkt.before=" << csv::format_double(before.combined)
            << "\nkkt.after=" << csv::format_double(after.combined) << '\n';
        return out.str();
      });
    }
  }
  return std::move(suite).take();
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const auto& s) { return s.failures == 0; });
}

VerifyReport run_verification(const VerifyOptions& options) {
  VerifyReport report;
  report.suites.push_back(monotonicity_suite(options));
  report.suites.push_back(majorization_suite(options));
  report.suites.push_back(fixed_point_suite(options));
  report.suites.push_back(psd_bound_suite(options));
  report.suites.push_back(parallel_suite(options));
  report.suites.push_back(kkt_suite(options));
  return report;
}

std::string to_text(const VerifyReport& report) {
  std::ostringstream out;
  for (const auto& s : report.suites) {
    out << "suite=" << s.name << " checks=" << s.checks << " failures=" << s.failures << '\n';
  }
  for (const auto& s : report.suites) {
    if (s.failures == 0) continue;
    out << "counterexample.suite=" << s.name << '\n' << s.counterexample;
    break;
  }
  out << "result=" << (report.passed() ? "pass" : "fail") << '\n';
  return out.str();
}

}  // namespace nmfmm
