#include "mcfh/dpss.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mcfh/fft_util.hpp"

namespace mcfh {

namespace {

constexpr double kPi = 3.14159265358979323846;

// prolate kernel row value K[m][n]
inline double kernel_entry(Index m, Index n, double w) {
  if (m == n) return 2.0 * w;
  const double d = static_cast<double>(m - n);
  return std::sin(2.0 * kPi * w * d) / (kPi * d);
}

}  // namespace

DpssDictionary compute_dpss(Index length, double half_bandwidth, Index kept) {
  require(length >= 1, "compute_dpss: length must be positive");
  require(half_bandwidth > 0.0 && half_bandwidth <= 0.5,
          "compute_dpss: need 0 < W_D <= 1/2");
  require(kept >= 1 && kept <= length, "compute_dpss: need 1 <= k_D <= N_D");

  DpssDictionary dict;
  dict.length = length;
  dict.half_bandwidth = half_bandwidth;
  dict.kept = kept;

  if (half_bandwidth == 0.5) {
    // full band: kernel is the identity; return the standard basis
    dict.Q = MatR::Identity(length, kept);
    dict.eigenvalues = VecR::Ones(kept);
    return dict;
  }

  // commuting tridiagonal matrix
  const double c = std::cos(2.0 * kPi * half_bandwidth);
  VecR diag(length), sub(length > 1 ? length - 1 : 0);
  for (Index n = 0; n < length; ++n) {
    const double a = static_cast<double>(length - 1 - 2 * n) / 2.0;
    diag[n] = a * a * c;
  }
  for (Index n = 1; n < length; ++n)
    sub[n - 1] = static_cast<double>(n) * static_cast<double>(length - n) / 2.0;

  Eigen::SelfAdjointEigenSolver<MatR> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (eig.info() != Eigen::Success)
    throw NumericalError("compute_dpss: tridiagonal eigensolver failed");

  // eigenvalues come out ascending; the most concentrated sequences belong
  // to the largest tridiagonal eigenvalues
  dict.Q.resize(length, kept);
  for (Index j = 0; j < kept; ++j) {
    VecR v = eig.eigenvectors().col(length - 1 - j);
    v.normalize();
    double s = v.sum();
    if (std::abs(s) <= 1e-8) {
      // antisymmetric vector: fix sign by the first significant element
      const double scale = v.cwiseAbs().maxCoeff();
      for (Index i = 0; i < length; ++i)
        if (std::abs(v[i]) > 1e-8 * scale) {
          s = v[i];
          break;
        }
    }
    if (s < 0.0) v = -v;
    dict.Q.col(j) = v;
  }

  // concentration eigenvalues as Rayleigh quotients on the prolate kernel
  dict.eigenvalues.resize(kept);
  for (Index j = 0; j < kept; ++j) {
    double acc = 0.0;
    for (Index m = 0; m < length; ++m) {
      double row = 0.0;
      for (Index n = 0; n < length; ++n)
        row += kernel_entry(m, n, half_bandwidth) * dict.Q(n, j);
      acc += dict.Q(m, j) * row;
    }
    dict.eigenvalues[j] = acc;
  }

  // Repair O(eps) rounding: values must be strictly decreasing in (0, 1).
  // Anything beyond 1e-12 would mean the computation itself is wrong.
  const double cap = std::nextafter(1.0, 0.0);
  double worst = 0.0;
  double prev = 1.0;
  for (Index j = 0; j < kept; ++j) {
    double v = dict.eigenvalues[j];
    double repaired = std::min(v, j == 0 ? cap : std::nextafter(prev, 0.0));
    if (repaired <= 0.0) repaired = prev * 0.5;
    worst = std::max(worst, std::abs(repaired - v));
    dict.eigenvalues[j] = repaired;
    prev = repaired;
  }
  if (worst > 1e-12)
    throw NumericalError("compute_dpss: eigenvalue ordering violation " +
                         std::to_string(worst) + " exceeds repair budget");
  return dict;
}

double approximation_error(const MatC& x_bb, const DpssDictionary& dict) {
  require(x_bb.cols() == dict.length, "approximation_error: width mismatch");
  const double total = x_bb.norm();
  if (total == 0.0) return 0.0;
  const MatC projected = (x_bb * dict.Q.cast<cplx>()) * dict.Q.transpose().cast<cplx>();
  return (x_bb - projected).norm() / total;
}

VecR per_row_out_of_band(const MatC& x_bb, double half_bandwidth) {
  VecR out(x_bb.rows());
  for (Index r = 0; r < x_bb.rows(); ++r) {
    const VecC spec = fft(x_bb.row(r).transpose());
    double inside = 0.0, total = 0.0;
    for (Index k = 0; k < spec.size(); ++k) {
      const double e = std::norm(spec[k]);
      total += e;
      if (std::abs(fft_freq(k, spec.size())) <= half_bandwidth) inside += e;
    }
    out[r] = total > 0.0 ? 1.0 - inside / total : 0.0;
  }
  return out;
}

std::shared_ptr<const DpssDictionary> DpssCache::get(Index length,
                                                     double half_bandwidth,
                                                     Index kept) {
  const auto key = std::make_tuple(length, std::bit_cast<std::uint64_t>(half_bandwidth), kept);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  auto fresh = std::make_shared<const DpssDictionary>(
      compute_dpss(length, half_bandwidth, kept));
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = entries_.emplace(key, std::move(fresh));
  return it->second;  // first writer wins
}

DpssCache& global_dpss_cache() {
  static DpssCache cache;
  return cache;
}

void save_dictionary(const std::string& path, const DpssDictionary& dict) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("save_dictionary: cannot open " + path);
  auto put_u64 = [&out](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
  };
  put_u64(static_cast<std::uint64_t>(dict.length));
  put_u64(std::bit_cast<std::uint64_t>(dict.half_bandwidth));
  put_u64(static_cast<std::uint64_t>(dict.kept));
  for (Index i = 0; i < dict.length; ++i)
    for (Index j = 0; j < dict.kept; ++j) {
      const double v = dict.Q(i, j);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  for (Index j = 0; j < dict.kept; ++j) {
    const double v = dict.eigenvalues[j];
    out.write(reinterpret_cast<const char*>(&v), 8);
  }
  if (!out) throw NumericalError("save_dictionary: write failed for " + path);
}

DpssDictionary load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("load_dictionary: cannot open " + path);
  auto get_u64 = [&in]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  DpssDictionary dict;
  dict.length = static_cast<Index>(get_u64());
  dict.half_bandwidth = std::bit_cast<double>(get_u64());
  dict.kept = static_cast<Index>(get_u64());
  if (!in || dict.length < 1 || dict.kept < 1 || dict.kept > dict.length)
    throw InvalidArgument("load_dictionary: corrupt header in " + path);
  dict.Q.resize(dict.length, dict.kept);
  for (Index i = 0; i < dict.length; ++i)
    for (Index j = 0; j < dict.kept; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), 8);
      dict.Q(i, j) = v;
    }
  dict.eigenvalues.resize(dict.kept);
  for (Index j = 0; j < dict.kept; ++j) {
    double v;
    in.read(reinterpret_cast<char*>(&v), 8);
    dict.eigenvalues[j] = v;
  }
  if (!in) throw InvalidArgument("load_dictionary: truncated file " + path);
  return dict;
}

}  // namespace mcfh
