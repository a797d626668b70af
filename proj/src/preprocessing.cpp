#include "mcfh/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcfh/fft_util.hpp"

namespace mcfh {

AlignedStreams interpolate_and_align(const CosetStreams& streams) {
  const McConfig& cfg = streams.config;
  cfg.validate();
  const Index m = streams.length();
  require(m >= 32, "interpolate_and_align: streams shorter than 32 samples");
  const int L = cfg.period;
  const Index n = m * L;

  AlignedStreams out;
  out.config = cfg;
  out.origin_time = streams.origin_time;
  out.streams.reserve(streams.streams.size());

  if (L == 1) {
    // identity sampler: nothing to interpolate
    out.streams = streams.streams;
    out.valid_range = {0, n};
    return out;
  }

  // indicator of the baseband slice [-1/(2L), 1/(2L)) on the n-point grid
  std::vector<char> in_band(static_cast<size_t>(n));
  const double lo = -0.5 / L, hi = 0.5 / L;
  for (Index k = 0; k < n; ++k) {
    const double f = fft_freq(k, n);
    in_band[static_cast<size_t>(k)] = (f >= lo && f < hi);
  }

  for (size_t i = 0; i < streams.streams.size(); ++i) {
    const int c = cfg.pattern[i];
    VecC v = VecC::Zero(n);
    for (Index k = 0; k < m; ++k) v[k * L + c] = streams.streams[i][k];
    VecC V = fft(v);
    for (Index k = 0; k < n; ++k)
      if (!in_band[static_cast<size_t>(k)]) V[k] = cplx(0, 0);
    V *= static_cast<double>(L);
    out.streams.push_back(ifft(V));
  }

  const Index guard = std::min<Index>(kInterpolationGuard, n / 4);
  out.valid_range = {guard, n - guard};
  return out;
}

std::vector<SegmentMatrix> segment(const AlignedStreams& aligned, Index r) {
  require(r >= 1, "segment: r must be >= 1");
  const Index q = static_cast<Index>(aligned.streams.size());
  require(q >= 1, "segment: no streams");
  std::vector<SegmentMatrix> out;
  long index = 0;
  for (Index k1 = aligned.valid_range.begin; k1 < aligned.valid_range.end;
       k1 += r) {
    const Index width = std::min(r, aligned.valid_range.end - k1);
    SegmentMatrix seg;
    seg.segment_index = index++;
    seg.start_index = k1;
    seg.config = aligned.config;
    seg.entries.resize(q, width);
    for (Index i = 0; i < q; ++i)
      seg.entries.row(i) = aligned.streams[static_cast<size_t>(i)].segment(k1, width).transpose();
    out.push_back(std::move(seg));
  }
  return out;
}

double dtlms_residual(const MatC& x_bb_truth, const SegmentMatrix& Z,
                      const MeasurementMatrix& A) {
  require(A.entries.rows() == Z.entries.rows(),
          "dtlms_residual: channel count mismatch");
  require(x_bb_truth.rows() == A.entries.cols(),
          "dtlms_residual: slice count mismatch");
  require(x_bb_truth.cols() == Z.entries.cols(),
          "dtlms_residual: segment width mismatch");
  const MatC ref = A.entries * x_bb_truth;
  const double den = ref.norm();
  const double num = (Z.entries - ref).norm();
  if (den == 0.0)
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace mcfh
