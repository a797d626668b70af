#pragma once

#include <unsupported/Eigen/FFT>

#include "mcfh/types.hpp"

namespace mcfh {

// Thin wrappers over Eigen's FFT (kissfft backend). A thread-local plan
// object is reused so repeated transforms of the same length stay cheap.

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

inline VecC fft(const VecC& x) {
  VecC out;
  fft_engine().fwd(out, x);
  return out;
}

// inverse includes the 1/n scale, so ifft(fft(x)) == x
inline VecC ifft(const VecC& X) {
  VecC out;
  fft_engine().inv(out, X);
  return out;
}

// digital frequency of bin k for an n-point FFT, in cycles/sample, in
// [-1/2, 1/2)
inline double fft_freq(Index k, Index n) {
  const Index half = (n + 1) / 2;  // bins [0, half) are nonnegative
  return (k < half ? static_cast<double>(k) : static_cast<double>(k - n)) /
         static_cast<double>(n);
}

}  // namespace mcfh
