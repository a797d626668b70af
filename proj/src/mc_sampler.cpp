#include "mcfh/mc_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "mcfh/fft_util.hpp"
#include "mcfh/rng.hpp"

namespace mcfh {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void McConfig::validate() const {
  require(base_interval_seconds > 0.0, "McConfig: T_c must be positive");
  require(period >= 1, "McConfig: L must be positive");
  require(!pattern.empty() && static_cast<int>(pattern.size()) <= period,
          "McConfig: need 1 <= q <= L");
  std::vector<int> seen(static_cast<size_t>(period), 0);
  for (int c : pattern) {
    require(c >= 0 && c < period, "McConfig: pattern entry out of range");
    require(!seen[static_cast<size_t>(c)]++, "McConfig: repeated pattern entry");
  }
}

CosetStreams sample(const ComplexSignal& x, const McConfig& config) {
  config.validate();
  require(x.size() > 0, "sample: empty input");
  require(std::abs(x.sample_interval_seconds - config.base_interval_seconds) <=
              1e-12 * config.base_interval_seconds,
          "sample: input sample interval != T_c");
  const int L = config.period;
  const Index m = x.size() / L;  // trim to a multiple of L
  require(m >= 1, "sample: input shorter than one period");

  CosetStreams out;
  out.config = config;
  out.origin_time = x.start_time_seconds;
  out.streams.reserve(config.pattern.size());
  for (int c : config.pattern) {
    VecC y(m);
    for (Index k = 0; k < m; ++k) y[k] = x.samples[k * L + c];
    out.streams.push_back(std::move(y));
  }
  return out;
}

MeasurementMatrix build_measurement_matrix(const McConfig& config) {
  config.validate();
  const int L = config.period;
  const int q = config.channel_count();
  MeasurementMatrix A;
  A.config = config;
  A.entries.resize(q, L);
  for (int i = 0; i < q; ++i)
    for (int l = 0; l < L; ++l)
      A.entries(i, l) = std::polar(1.0, kTwoPi * config.pattern[static_cast<size_t>(i)] * l / L);
  return A;
}

std::vector<int> random_pattern(int period, int channel_count, std::uint64_t seed) {
  require(period >= 1, "random_pattern: L must be positive");
  if (channel_count > period)
    throw InvalidArgument("random_pattern: q > L");
  require(channel_count >= 1, "random_pattern: q must be positive");
  std::vector<int> pool(static_cast<size_t>(period));
  std::iota(pool.begin(), pool.end(), 0);
  auto rng = SubstreamRng::substream(seed, "pattern");
  // partial Fisher-Yates: first q entries are the draw
  for (int i = 0; i < channel_count; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_index(
                           static_cast<std::uint64_t>(period - i)));
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + channel_count);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

int matrix_rank(const MatC& M) {
  Eigen::JacobiSVD<MatC> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double tol = 1e-9 * sv[0];
  int r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++r;
  return r;
}

// enumerate k-subsets of {0..L-1}; returns false when a dependent subset is
// found (spark = k)
bool all_subsets_independent(const MatC& A, int k) {
  const int L = static_cast<int>(A.cols());
  std::vector<int> idx(static_cast<size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  MatC sub(A.rows(), k);
  while (true) {
    for (int j = 0; j < k; ++j) sub.col(j) = A.col(idx[static_cast<size_t>(j)]);
    if (matrix_rank(sub) < k) return false;
    // next combination
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<size_t>(pos)] == L - k + pos) --pos;
    if (pos < 0) return true;
    ++idx[static_cast<size_t>(pos)];
    for (int j = pos + 1; j < k; ++j)
      idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
  }
}

}  // namespace

int spark(const MeasurementMatrix& A) {
  const int L = static_cast<int>(A.entries.cols());
  const int q = static_cast<int>(A.entries.rows());
  if (L > 20)
    throw Unsupported("spark: exhaustive search limited to L <= 20; "
                      "use mutual_coherence instead");
  // any q+1 columns of a q-row matrix are dependent, so spark <= q+1
  for (int k = 1; k <= q; ++k)
    if (!all_subsets_independent(A.entries, k)) return k;
  return q + 1;
}

double mutual_coherence(const MeasurementMatrix& A) {
  MatC An = A.entries;
  for (Index j = 0; j < An.cols(); ++j) An.col(j).normalize();
  const MatC G = An.adjoint() * An;
  double worst = 0.0;
  for (Index a = 0; a < G.rows(); ++a)
    for (Index b = 0; b < G.cols(); ++b)
      if (a != b) worst = std::max(worst, std::abs(G(a, b)));
  return worst;
}

std::vector<int> choose_pattern(int period, int channel_count,
                                std::uint64_t seed, int tries) {
  require(tries >= 1, "choose_pattern: need at least one candidate");
  McConfig probe;
  probe.base_interval_seconds = 1.0;
  probe.period = period;
  std::vector<int> best;
  double best_coh = 2.0;
  const bool check_spark = period <= 20;
  for (int t = 0; t < tries; ++t) {
    auto cand = random_pattern(period, channel_count,
                               SubstreamRng::mix(seed, "candidate",
                                                 static_cast<std::uint64_t>(t)));
    probe.pattern = cand;
    auto A = build_measurement_matrix(probe);
    const double coh = mutual_coherence(A);
    if (coh >= best_coh) continue;
    if (check_spark && channel_count < period &&
        spark(A) != channel_count + 1)
      continue;
    best_coh = coh;
    best = std::move(cand);
  }
  if (best.empty())  // all candidates spark-deficient; fall back to first draw
    best = random_pattern(period, channel_count, SubstreamRng::mix(seed, "candidate", 0));
  return best;
}

double frequency_domain_residual(const ComplexSignal& x,
                                 const CosetStreams& streams) {
  const McConfig& cfg = streams.config;
  cfg.validate();
  const int L = cfg.period;
  const Index m = streams.length();
  require(m > 0, "frequency_domain_residual: empty streams");
  const Index n = m * L;
  require(x.size() >= n, "frequency_domain_residual: dense input shorter than streams");

  // Exact circular identity: with X = DFT_n(x), Y_i = DFT_m(y_i), n = L*m,
  //   sum_l A_il * X[(b + l*m) mod n] = L * exp(-j*2*pi*c_i*b/n) * Y_i[b].
  // The left side is the measurement matrix acting on the slice spectra; the
  // right side is the phase-corrected coset spectrum.
  const VecC X = fft(x.samples.head(n));
  double num = 0.0, den = 0.0;
  const auto A = build_measurement_matrix(cfg).entries;
  for (int i = 0; i < cfg.channel_count(); ++i) {
    const VecC Y = fft(streams.streams[static_cast<size_t>(i)]);
    const int c = cfg.pattern[static_cast<size_t>(i)];
    for (Index b = 0; b < m; ++b) {
      cplx lhs(0, 0);
      for (int l = 0; l < L; ++l)
        lhs += A(i, l) * X[(b + static_cast<Index>(l) * m) % n];
      const cplx rhs = static_cast<double>(L) *
                       std::polar(1.0, -kTwoPi * c * static_cast<double>(b) /
                                           static_cast<double>(n)) *
                       Y[b];
      num += std::norm(lhs - rhs);
      den += std::norm(lhs);
    }
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

int slice_of_digital_frequency(double nu, int period) {
  const double v = nu - std::floor(nu);  // reduce to [0, 1)
  const long l = static_cast<long>(std::floor(v * period + 0.5));
  return static_cast<int>(l % period);
}

}  // namespace mcfh
