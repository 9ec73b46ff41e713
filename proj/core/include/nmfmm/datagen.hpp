#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nmfmm/matrix.hpp"

namespace nmfmm {

/// i.i.d. U[lo, hi] entries, row-major from a seeded mt19937_64. Requires
/// 0 <= lo < hi. Columns are not normalized.
Matrix generate_dense_uniform(std::size_t n, std::size_t m, double lo, double hi,
                              std::uint64_t seed);

/// Standard-normal draws thresholded at their empirical `sparsity` quantile:
/// entries at or below the threshold become 0, the rest are shifted down by it.
/// Requires sparsity in [0, 1).
Matrix generate_sparse(std::size_t n, std::size_t m, double sparsity, std::uint64_t seed);

/// Fraction of exactly-zero entries.
double zero_fraction(const Matrix& m);

struct BssScenario {
  double duration_s = 10.0;
  double sample_rate_hz = 100.0;
  std::size_t num_sensors = 200;
  std::size_t num_sources = 5;
  double noise_variance = 0.01;
  std::uint64_t seed = 0;

  /// duration * rate, rounded; throws ContractError if not (close to) an integer.
  std::size_t num_samples() const;
};

struct BssData {
  Matrix sources;   // num_sources x m, noisy when noise_variance > 0
  Matrix clean_sources;
  Matrix mixing;    // num_sensors x num_sources
  Matrix observed;  // num_sensors x m
  std::vector<std::string> warnings;
};

/// Source waveforms before clipping, evaluated at time t (seconds):
///   0: square wave, 1 Hz, 50% duty (+1 / -1)
///   1: rectangular pulse, 1 Hz, 25% duty: +1 on [0.5, 0.75) of each period, else -1
///   2: sine, 2 Hz
///   3: sine, 20 Hz
///   4: linear chirp sin(2 pi 3 t^2), instantaneous frequency 6 t Hz
double bss_source_value(std::size_t source, double t);

/// Instantaneous frequency of the chirp source, in Hz.
constexpr double bss_chirp_frequency(double t) { return 6.0 * t; }

/// Five clipped sources (plus clipped Gaussian noise; `clean_sources` holds
/// them without noise), a column-normalized
/// U(0, 1] mixing matrix and observed = mixing * sources. Only the first
/// `num_sources` waveforms are used; at most five exist.
BssData generate_bss(const BssScenario& scenario);

}  // namespace nmfmm
