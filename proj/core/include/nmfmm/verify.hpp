#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nmfmm {

/// Deliberate defects used to check that the verification harness notices them.
enum class Fault {
  kNone,
  /// INOM steps along +gradient instead of -gradient.
  kInomSignFlip,
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  bool quick = false;
  Fault fault = Fault::kNone;
};

struct SuiteResult {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  /// key=value lines describing the first failure; empty when none.
  std::string counterexample;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool passed() const;
};

/// Runs the invariant suites: monotonicity, majorization, fixed-point,
/// psd-bound, parallel-equivalence and kkt-decrease. `quick` reduces sample
/// counts but keeps every suite.
VerifyReport run_verification(const VerifyOptions& options);

/// One `suite=<name> checks=<n> failures=<k>` line per suite, followed by the
/// first counterexample if any suite failed.
std::string to_text(const VerifyReport& report);

}  // namespace nmfmm
