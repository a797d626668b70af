#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include <Eigen/Dense>

#include "mcfh/types.hpp"

namespace mcfh {

// The leading k_D discrete prolate spheroidal sequences of length N_D at
// half-bandwidth W_D, as columns of Q, with their concentration eigenvalues.
struct DpssDictionary {
  Index length = 0;          // N_D
  double half_bandwidth = 0; // W_D in (0, 1/2]
  Index kept = 0;            // k_D
  MatR Q;                    // N_D x k_D, orthonormal columns
  VecR eigenvalues;          // k_D values in (0, 1), strictly decreasing
};

// Compute via the symmetric tridiagonal commuting matrix (diagonal
// ((N-1-2n)/2)^2 cos(2 pi W), off-diagonal n(N-n)/2), eigenvectors taken in
// descending tridiagonal-eigenvalue order; concentration eigenvalues are
// Rayleigh quotients of the prolate kernel sin(2 pi W (m-n)) / (pi (m-n))
// (diagonal 2W) on those vectors. Sign convention for reproducibility: each
// vector's element sum is positive (first significantly nonzero element
// positive for the antisymmetric vectors whose sum vanishes).
//
// The Rayleigh values carry O(1e-15) rounding that can breach 1.0 or invert
// ordering inside the near-1 cluster; they are repaired to a strictly
// decreasing positive sequence capped below 1. Pre-repair violations beyond
// 1e-12 are treated as a real defect and throw.
DpssDictionary compute_dpss(Index length, double half_bandwidth, Index kept);

// Z_reduced = Z * Q. Requires dict.length == Z.cols().
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
reduce(const Eigen::MatrixBase<Derived>& Z, const DpssDictionary& dict) {
  require(Z.cols() == dict.length, "reduce: dictionary length != segment width");
  return Z.derived() * dict.Q.cast<typename Derived::Scalar>();
}

// X = X_reduced * Q^T: the rank-k_D-per-row lift back to full width.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
lift(const Eigen::MatrixBase<Derived>& X_reduced, const DpssDictionary& dict) {
  require(X_reduced.cols() == dict.kept, "lift: coefficient count != k_D");
  return X_reduced.derived() * dict.Q.transpose().cast<typename Derived::Scalar>();
}

// ||X - X Q Q^T||_F / ||X||_F; 0 for zero X.
double approximation_error(const MatC& x_bb, const DpssDictionary& dict);

// Per-row out-of-band energy fraction delta_row of x_bb at the dictionary's
// half-bandwidth (spectral mass outside [-W_D, W_D]), for reporting the
// projection-bound hypothesis.
VecR per_row_out_of_band(const MatC& x_bb, double half_bandwidth);

// Process-wide dictionary cache keyed by (N_D, W_D bits, k_D); first writer
// wins, all later callers share the immutable entry.
class DpssCache {
public:
  std::shared_ptr<const DpssDictionary> get(Index length, double half_bandwidth,
                                            Index kept);

private:
  std::mutex mutex_;
  std::map<std::tuple<Index, std::uint64_t, Index>,
           std::shared_ptr<const DpssDictionary>>
      entries_;
};

DpssCache& global_dpss_cache();

// On-disk cache format: u64 N_D, f64 W_D (raw bits), u64 k_D, then row-major
// f64 Q and the k_D eigenvalues.
void save_dictionary(const std::string& path, const DpssDictionary& dict);
DpssDictionary load_dictionary(const std::string& path);

}  // namespace mcfh
