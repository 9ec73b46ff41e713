#include "nmfmm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nmfmm/csv.hpp"
#include "nmfmm/errors.hpp"
#include "nmfmm/linalg.hpp"

namespace nmfmm {

Matrix generate_dense_uniform(std::size_t n, std::size_t m, double lo, double hi,
                              std::uint64_t seed) {
  if (lo < 0.0) throw ContractError("generate_dense_uniform: lo must be >= 0 for nonnegative data");
  if (!(hi > lo)) throw ContractError("generate_dense_uniform: requires lo < hi");
  Matrix out(n, m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& x : out.data()) x = dist(rng);
  return out;
}

Matrix generate_sparse(std::size_t n, std::size_t m, double sparsity, std::uint64_t seed) {
  if (!(sparsity >= 0.0 && sparsity < 1.0)) {
    throw ContractError("generate_sparse: sparsity must be in [0, 1)");
  }
  Matrix out(n, m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (double& x : out.data()) x = dist(rng);

  std::vector<double> sorted(out.data().begin(), out.data().end());
  const auto k = static_cast<std::size_t>(std::floor(sparsity * static_cast<double>(sorted.size())));
  const auto kth = sorted.begin() + static_cast<std::ptrdiff_t>(std::min(k, sorted.size() - 1));
  std::nth_element(sorted.begin(), kth, sorted.end());
  const double threshold = *kth;

  for (double& x : out.data()) x = x <= threshold ? 0.0 : x - threshold;
  return out;
}

double zero_fraction(const Matrix& m) {
  const auto zeros = std::count(m.data().begin(), m.data().end(), 0.0);
  return static_cast<double>(zeros) / static_cast<double>(m.size());
}

std::size_t BssScenario::num_samples() const {
  if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0)) {
    throw ContractError("BSS duration and sample rate must be positive");
  }
  const double samples = duration_s * sample_rate_hz;
  const double rounded = std::round(samples);
  if (std::abs(samples - rounded) > 1e-9 * std::max(1.0, samples) || rounded < 1.0) {
    throw ContractError("duration * sample rate must be a positive integer sample count");
  }
  return static_cast<std::size_t>(rounded);
}

double bss_source_value(std::size_t source, double t) {
  using std::numbers::pi;
  const double phase = t - std::floor(t);  // 1 Hz waves
  switch (source) {
    case 0: return phase < 0.5 ? 1.0 : -1.0;
    // The pulse sits in the square wave's off half. With nested supports,
    // {pulse, square - pulse} would fit the mixtures exactly as well as the
    // true pair, and the sources would not be identifiable.
    case 1: return phase >= 0.5 && phase < 0.75 ? 1.0 : -1.0;
    case 2: return std::sin(2.0 * pi * 2.0 * t);
    case 3: return std::sin(2.0 * pi * 20.0 * t);
    case 4: return std::sin(2.0 * pi * 3.0 * t * t);
    default: throw ContractError("bss_source_value: only five sources are defined");
  }
}

BssData generate_bss(const BssScenario& scenario) {
  const std::size_t m = scenario.num_samples();
  if (scenario.num_sources == 0 || scenario.num_sources > 5) {
    throw ContractError("BSS scenario supports 1 to 5 sources");
  }
  if (scenario.num_sensors == 0) throw ContractError("BSS scenario needs at least one sensor");
  if (scenario.noise_variance < 0.0) throw ContractError("noise variance must be >= 0");

  BssData out{Matrix(scenario.num_sources, m), Matrix(scenario.num_sources, m),
              Matrix(scenario.num_sensors, scenario.num_sources),
              Matrix(scenario.num_sensors, m), {}};

  const double nyquist_needed = 2.0 * bss_chirp_frequency(scenario.duration_s);
  if (scenario.sample_rate_hz < nyquist_needed) {
    out.warnings.push_back("aliasing: sample rate " + csv::format_double(scenario.sample_rate_hz) +
                           " Hz is below " + csv::format_double(nyquist_needed) +
                           " Hz, twice the chirp's final frequency");
  }

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(scenario.noise_variance));
  for (std::size_t s = 0; s < scenario.num_sources; ++s) {
    for (std::size_t k = 0; k < m; ++k) {
      const double t = static_cast<double>(k) / scenario.sample_rate_hz;
      double x = std::max(0.0, bss_source_value(s, t));
      out.clean_sources(s, k) = x;
      if (scenario.noise_variance > 0.0) x = std::max(0.0, x + noise(rng));
      out.sources(s, k) = x;
    }
  }

  std::uniform_real_distribution<double> mix(0.0, 1.0);
  // uniform_real_distribution draws from [0, 1); 1 - u lands in (0, 1].
  for (double& x : out.mixing.data()) x = 1.0 - mix(rng);
  out.mixing = normalize_columns(out.mixing);
  out.observed = multiply(out.mixing, out.sources);
  return out;
}

}  // namespace nmfmm
