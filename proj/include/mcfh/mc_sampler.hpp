#pragma once

#include <cstdint>
#include <vector>

#include "mcfh/types.hpp"

namespace mcfh {

// MC(T_c, L, q, C) sampler description.
struct McConfig {
  double base_interval_seconds = 0.0;  // T_c
  int period = 0;                      // L
  std::vector<int> pattern;            // q distinct offsets c_i in [0, L)

  int channel_count() const { return static_cast<int>(pattern.size()); }
  void validate() const;
};

// The q decimated streams y_i(k) = x((k*L + c_i) * T_c), equal lengths.
struct CosetStreams {
  std::vector<VecC> streams;
  McConfig config;
  double origin_time = 0.0;

  Index length() const { return streams.empty() ? 0 : streams.front().size(); }
};

// q x L matrix with entries A_il = exp(j*2*pi*c_i*l/L): the rows of the
// L-point DFT matrix selected by the pattern.
struct MeasurementMatrix {
  MatC entries;
  McConfig config;
};

// Decimate a dense base-rate stream into coset streams. The input is trimmed
// to a multiple of L samples so all streams come out equal length (required
// downstream by the circular interpolator).
CosetStreams sample(const ComplexSignal& x, const McConfig& config);

MeasurementMatrix build_measurement_matrix(const McConfig& config);

// q distinct offsets drawn uniformly without replacement, sorted ascending.
std::vector<int> random_pattern(int period, int channel_count, std::uint64_t seed);

// Exact spark by brute force over column subsets of size <= q+1 (rank via
// SVD, singular values > 1e-9 * max). Only for L <= 20.
int spark(const MeasurementMatrix& A);

// Largest off-diagonal |<a_i, a_j>| / (|a_i||a_j|): cheap lower-bound proxy
// used to rank candidate patterns when exhaustive spark is unavailable.
double mutual_coherence(const MeasurementMatrix& A);

// Pattern selection used by the experiment harness: best (minimum) mutual
// coherence over `tries` seeded draws; when L <= 20 candidates must also
// attain the maximal spark q+1. Deterministic given seed.
std::vector<int> choose_pattern(int period, int channel_count,
                                std::uint64_t seed, int tries = 200);

// Numerical witness of the frequency-domain sampler identity: compares the
// per-coset DFTs (phase-corrected, scaled) against the measurement matrix
// acting on the slice DFTs of the dense input. Returns a relative Frobenius
// residual; 0 for zero input. Diagnostic only.
double frequency_domain_residual(const ComplexSignal& x,
                                 const CosetStreams& streams);

// Slice index covering digital frequency nu (cycles/sample): the slice whose
// band [l/L - 1/(2L), l/L + 1/(2L)) mod 1 contains nu.
int slice_of_digital_frequency(double nu, int period);

}  // namespace mcfh
