#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "mcfh/types.hpp"

namespace mcfh {

// Deterministic seeded generator with named substreams.
//
// All randomness in the toolkit flows from one master seed through
// substream(master, label, a, b): the label and indices are FNV-1a-hashed and
// mixed into the seed, so every (radio, hop, trial, ...) gets an independent,
// order-independent stream. Draw transforms are hand-rolled (not
// std::uniform_real_distribution etc.) so byte-identical reruns do not depend
// on standard-library implementation details.
class SubstreamRng {
public:
  explicit SubstreamRng(std::uint64_t seed) : gen_(seed) {}

  static std::uint64_t mix(std::uint64_t master, std::string_view label,
                           std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 14695981039346656037ull;  // FNV-1a 64
    auto feed = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
      }
    };
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    feed(a);
    feed(b);
    // splitmix64 finalizer stirs the master seed in
    std::uint64_t z = h + 0x9e3779b97f4a7c15ull * (master + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static SubstreamRng substream(std::uint64_t master, std::string_view label,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
    return SubstreamRng(mix(master, label, a, b));
  }

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1) with 53-bit resolution
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform integer in [0, n)
  std::uint64_t uniform_index(std::uint64_t n) {
    // rejection sampling; unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  // standard normal via Box-Muller (cached spare)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  cplx normal_complex() { return cplx(normal(), normal()); }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mcfh
