#pragma once

#include <vector>

#include "mcfh/mc_sampler.hpp"
#include "mcfh/types.hpp"

namespace mcfh {

// Interpolated, delay-corrected coset streams z_i(k) at the base rate 1/T_c.
// valid_range excludes the guard transients at both record ends.
struct AlignedStreams {
  std::vector<VecC> streams;  // q streams, each of length m*L
  McConfig config;
  IndexInterval valid_range;
  double origin_time = 0.0;

  Index length() const { return streams.empty() ? 0 : streams.front().size(); }
};

// One recovery segment: the q x r matrix Z with [Z]_ij = z_i(k_1 + j).
struct SegmentMatrix {
  MatC entries;
  long segment_index = 0;
  Index start_index = 0;  // k_1, global base-rate index
  McConfig config;
};

// Guard width excluded from valid_range at each record end (base-rate
// samples). The interpolator is a circular spectral filter over the whole
// record, so its only transients are wrap-around bleed at the two ends.
inline constexpr Index kInterpolationGuard = 512;

// Bandlimited interpolation + delay correction in one step: each coset's
// samples are placed at their true positions (indices congruent to c_i mod
// L) in a zero-filled base-rate grid, and a circular brick-wall filter over
// the baseband slice [-1/(2L), 1/(2L)) (scaled by L) fills the gaps. Exactly
// interpolating: retained positions reproduce y_i to machine precision.
AlignedStreams interpolate_and_align(const CosetStreams& streams);

// Consecutive non-overlapping windows of width r covering valid_range; the
// final partial window is kept at its true width.
std::vector<SegmentMatrix> segment(const AlignedStreams& aligned, Index r);

// Relative residual ||Z - A*X_bb||_F / ||A*X_bb||_F of the discrete-time
// equivalent system on one segment, given externally computed ground-truth
// baseband slice streams X_bb (simulation only). 0 for zero signals.
double dtlms_residual(const MatC& x_bb_truth, const SegmentMatrix& Z,
                      const MeasurementMatrix& A);

}  // namespace mcfh
