#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace mcfh {

using cplx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;
using Index = Eigen::Index;

// Thrown for violated preconditions / malformed configuration (CLI exit 2).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Thrown for runtime numerical failures, e.g. rank-deficient least squares
// (CLI exit 3). segment_index < 0 means "not tied to a segment".
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg, long segment = -1)
      : std::runtime_error(msg), segment_index(segment) {}
  long segment_index;
};

// Metric requested on degenerate input (zero reference signal).
class UndefinedMetric : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Operation outside its supported parameter range (e.g. exhaustive spark at
// large L).
class Unsupported : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Half-open index interval [begin, end).
struct IndexInterval {
  Index begin = 0;
  Index end = 0;
  Index length() const { return end > begin ? end - begin : 0; }
  bool contains(Index k) const { return k >= begin && k < end; }
};

// Uniformly sampled complex baseband stream; the universal currency between
// modules.
struct ComplexSignal {
  VecC samples;
  double sample_interval_seconds = 0.0;
  double start_time_seconds = 0.0;

  Index size() const { return samples.size(); }
  double duration() const {
    return static_cast<double>(samples.size()) * sample_interval_seconds;
  }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace mcfh
