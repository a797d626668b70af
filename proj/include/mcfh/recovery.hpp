#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcfh/mc_sampler.hpp"
#include "mcfh/preprocessing.hpp"
#include "mcfh/types.hpp"

namespace mcfh {

// Ordered set of active spectral-slice indices with per-segment metadata.
struct SupportSet {
  std::vector<int> indices;  // sorted ascending, distinct, in [0, L)
  double occupancy = 0.0;    // |indices| / L
  bool degenerate_covariance = false;  // subspace split saw rank < p

  int size() const { return static_cast<int>(indices.size()); }
};

enum class SolverId { somp, music };

struct SegmentSolution {
  SupportSet support;
  MatC x_bb;                  // L x r, rows off support exactly zero
  double residual_norm = 0.0; // ||Z - A * x_bb||_F
  SolverId solver_id = SolverId::somp;
  double wall_time_seconds = 0.0;  // solver call only
  long segment_index = 0;
  Index start_index = 0;
  Index width = 0;
  int rank_z = 0;
};

struct UniquenessReport {
  int rank_Z = 0;
  bool spark_verified = false;     // exhaustive spark feasible at this L
  int spark_value = 0;             // valid only when spark_verified
  bool spark_hypothesis_ok = false;
  double bound_rhs = 0.0;          // (spark + rank - 1) / 2, NaN if unverified
  int corollary_threshold = 0;     // 8N - rank_Z
  bool satisfied = false;
};

// ---------------------------------------------------------------------------
// Expression-friendly solver cores, templated on the Eigen scalar.
// ---------------------------------------------------------------------------

template <class Scalar>
struct MmvResult {
  std::vector<int> support;  // sorted
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x;  // L x r
  double residual_norm = 0.0;
};

namespace detail {

template <class Derived>
int numeric_rank(const Eigen::MatrixBase<Derived>& M, double rel_tol = 1e-9) {
  Eigen::JacobiSVD<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic,
                                 Eigen::Dynamic>>
      svd(M.derived());
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0) return 0;
  int r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * sv[0]) ++r;
  return r;
}

inline std::string support_to_string(const std::vector<int>& s) {
  std::string out = "{";
  for (size_t i = 0; i < s.size(); ++i)
    out += (i ? "," : "") + std::to_string(s[static_cast<size_t>(i)]);
  return out + "}";
}

// least squares of Z against the columns of A listed in `support`; throws on
// numerical rank deficiency
template <class DerivedZ, class DerivedA>
Eigen::Matrix<typename DerivedZ::Scalar, Eigen::Dynamic, Eigen::Dynamic>
solve_on_support(const Eigen::MatrixBase<DerivedZ>& Z,
                 const Eigen::MatrixBase<DerivedA>& A,
                 const std::vector<int>& support) {
  using Mat = Eigen::Matrix<typename DerivedZ::Scalar, Eigen::Dynamic,
                            Eigen::Dynamic>;
  const int s = static_cast<int>(support.size());
  Mat sub(A.rows(), s);
  for (int j = 0; j < s; ++j) sub.col(j) = A.derived().col(support[static_cast<size_t>(j)]);
  Eigen::ColPivHouseholderQR<Mat> qr(sub);
  qr.setThreshold(1e-10);
  if (qr.rank() < s)
    throw NumericalError("least squares: measurement matrix rank-deficient on support " +
                         support_to_string(support));
  return qr.solve(Z.derived());
}

}  // namespace detail

// Simultaneous OMP: greedily add the column of A whose correlation with the
// residual has the largest l2 norm across snapshots (ties -> lowest index),
// re-solving least squares on the accumulated support each step. Stops at
// residual_norm <= residual_tol * ||Z||_F or max_sparsity columns.
template <class DerivedZ, class DerivedA>
MmvResult<typename DerivedZ::Scalar> somp_core(
    const Eigen::MatrixBase<DerivedZ>& Z, const Eigen::MatrixBase<DerivedA>& A,
    int max_sparsity, double residual_tol = 1e-6) {
  using Scalar = typename DerivedZ::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index q = A.rows(), L = A.cols(), r = Z.cols();
  require(Z.rows() == q, "somp: Z/A row mismatch");
  require(max_sparsity >= 0 && max_sparsity <= q,
          "somp: max_sparsity must satisfy 0 <= s <= q");
  require(residual_tol >= 0.0, "somp: negative residual tolerance");

  MmvResult<Scalar> out;
  out.x = Mat::Zero(L, r);
  const double nz = Z.norm();
  if (nz == 0.0) return out;

  Mat residual = Z;
  Mat coeffs;
  std::vector<int> support;
  std::vector<char> used(static_cast<size_t>(L), 0);
  while (static_cast<int>(support.size()) < max_sparsity &&
         residual.norm() > residual_tol * nz) {
    const Mat corr = A.adjoint() * residual;  // L x r
    int pick = -1;
    double best = -1.0;
    for (Index l = 0; l < L; ++l) {
      if (used[static_cast<size_t>(l)]) continue;
      const double v = corr.row(l).norm();
      if (v > best) {
        best = v;
        pick = static_cast<int>(l);
      }
    }
    if (pick < 0) break;
    used[static_cast<size_t>(pick)] = 1;
    support.push_back(pick);
    coeffs = detail::solve_on_support(Z, A, support);
    Mat sub(q, support.size());
    for (size_t j = 0; j < support.size(); ++j)
      sub.col(static_cast<Index>(j)) = A.derived().col(support[j]);
    residual = Z - sub * coeffs;
  }
  // sort support, permuting solution rows to match
  std::vector<int> order(support.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return support[static_cast<size_t>(a)] < support[static_cast<size_t>(b)]; });
  for (int j : order) out.support.push_back(support[static_cast<size_t>(j)]);
  for (size_t j = 0; j < order.size(); ++j)
    out.x.row(out.support[j]) = coeffs.row(order[static_cast<size_t>(j)]);
  out.residual_norm = residual.norm();
  return out;
}

// Modified MUSIC support selection from a q x q covariance: eigendecompose,
// split off the rank-p signal subspace, return the p columns of A closest to
// it (smallest noise-subspace projection).
template <class DerivedR, class DerivedA>
std::pair<std::vector<int>, bool> music_support_core(
    const Eigen::MatrixBase<DerivedR>& R_y,
    const Eigen::MatrixBase<DerivedA>& A, int p) {
  using Mat = Eigen::Matrix<typename DerivedR::Scalar, Eigen::Dynamic,
                            Eigen::Dynamic>;
  const Index q = A.rows(), L = A.cols();
  require(R_y.rows() == q && R_y.cols() == q, "music: covariance must be q x q");
  if (p >= q)
    throw InvalidArgument("music: need p <= q - 1 (got p = " + std::to_string(p) + ")");
  require(p >= 0, "music: negative p");
  if (p == 0) return {{}, false};

  Eigen::SelfAdjointEigenSolver<Mat> eig(R_y.derived());
  const auto& w = eig.eigenvalues();  // ascending
  const double wmax = w[q - 1];
  int rank = 0;
  for (Index i = 0; i < q; ++i)
    if (w[i] > 1e-9 * wmax) ++rank;
  const bool degenerate = rank < p;

  const Mat noise = eig.eigenvectors().leftCols(q - p);
  std::vector<std::pair<double, int>> score;
  score.reserve(static_cast<size_t>(L));
  for (Index l = 0; l < L; ++l)
    score.push_back({(noise.adjoint() * A.derived().col(l)).norm(),
                     static_cast<int>(l)});
  std::sort(score.begin(), score.end());
  std::vector<int> support;
  for (int j = 0; j < p; ++j) support.push_back(score[static_cast<size_t>(j)].second);
  std::sort(support.begin(), support.end());
  return {support, degenerate};
}

// ---------------------------------------------------------------------------
// Concrete toolkit API on segments.
// ---------------------------------------------------------------------------

SegmentSolution somp_solve(const SegmentMatrix& Z, const MeasurementMatrix& A,
                           int max_sparsity, double residual_tol = 1e-6);

SupportSet music_support(const SegmentMatrix& Z, const MeasurementMatrix& A, int p);
SupportSet music_support(const MatC& Z_cov, const MeasurementMatrix& A, int p);

SegmentSolution least_squares_on_support(const SegmentMatrix& Z,
                                         const MeasurementMatrix& A,
                                         const SupportSet& support);

UniquenessReport uniqueness_report(const SegmentMatrix& Z,
                                   const MeasurementMatrix& A, int radio_count);

// Modulate each active baseband row back to its slice (phase-continuous in
// the global base-rate index) and sum; solutions must cover consecutive
// segments. Output runs at the base rate.
ComplexSignal reassemble(const std::vector<SegmentSolution>& solutions,
                         const McConfig& config, double origin_time = 0.0);

enum class DictionaryMode { none, dpss };

struct RecoveryOptions {
  SolverId solver = SolverId::somp;
  int max_sparsity = 8;        // engine clamps to min(max_sparsity, q)
  double residual_tol = 1e-6;
  int music_p = -1;            // -1: blind estimate #{lambda > 1e-6 * max}
  DictionaryMode dictionary = DictionaryMode::none;
  double kd_factor = 4.0;      // k_D = ceil(kd_factor * N_D * W_D)
};

// Per-segment recovery over a whole record. Numerical failures are rethrown
// with the offending segment index attached.
std::vector<SegmentSolution> recover_segments(
    const std::vector<SegmentMatrix>& segments, const MeasurementMatrix& A,
    const RecoveryOptions& options);

}  // namespace mcfh
