#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include <doctest.h>

#include "mcfh/fft_util.hpp"
#include "mcfh/fh_signal.hpp"
#include "oracles.hpp"

using namespace mcfh;

TEST_CASE("hop window: trapezoid shape") {
  const double th = 0.95e-3;
  CHECK(hop_window(0.5 * th, th) == 1.0);
  CHECK(hop_window(-0.001, th) == 0.0);
  CHECK(hop_window(th, th) == 0.0);          // right-open support
  CHECK(hop_window(0.025 * th, th) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(hop_window(0.975 * th, th) == doctest::Approx(0.5).epsilon(1e-12));
  for (double f : {0.0, 0.01, 0.04, 0.3, 0.7, 0.96, 0.999}) {
    const double w = hop_window(f * th, th);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
  }
  CHECK_THROWS_AS(hop_window(0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(hop_window(0.0, -1.0), InvalidArgument);
}

TEST_CASE("raised-cosine pulse: Nyquist zeros and singularity") {
  const double ts = 1e-4, beta = 0.3;
  CHECK(raised_cosine_pulse(0.0, ts, beta) == 1.0);
  for (int k = 1; k <= 5; ++k) {
    CHECK(std::abs(raised_cosine_pulse(k * ts, ts, beta)) < 1e-12);
    CHECK(std::abs(raised_cosine_pulse(-k * ts, ts, beta)) < 1e-12);
  }
  // removable singularity at t = Ts/(2 beta): limit is (pi/4) sinc(1/(2 beta))
  const double t_sing = ts / (2.0 * beta);
  const double expected = M_PI / 4.0 *
                          std::sin(M_PI / (2.0 * beta)) / (M_PI / (2.0 * beta));
  CHECK(raised_cosine_pulse(t_sing, ts, beta) ==
        doctest::Approx(expected).epsilon(1e-9));
  // continuity across the singularity
  CHECK(raised_cosine_pulse(t_sing * (1 + 1e-9), ts, beta) ==
        doctest::Approx(expected).epsilon(1e-6));
}

namespace {

RadioConfig test_radio(std::uint64_t seed, double hri = 1e-3) {
  RadioConfig r;
  r.hop_count = 40;
  r.hri_seconds = hri;
  r.delay_seconds = 0.0;
  r.freq_min_hz = 0.0;
  r.freq_max_hz = 300e3;
  r.symbol_rate = 25e3 / 1.3;
  r.seed = seed;
  return r;
}

}  // namespace

TEST_CASE("baseband hop: support, determinism, band concentration") {
  const double dt = 1e-6;
  RadioConfig radio = test_radio(7);
  HopRecord hop;
  hop.radio_index = 0;
  hop.hop_index = 2;
  hop.carrier_hz = 0.0;
  hop.start_seconds = 2 * radio.hri_seconds;
  hop.duration_seconds = 0.95 * radio.hri_seconds;

  const ComplexSignal g = synthesize_baseband_hop(radio, hop, dt);
  CHECK(g.size() > 0);
  CHECK(g.sample_interval_seconds == dt);
  // samples lie inside [start, start + T_H)
  CHECK(g.start_time_seconds >= hop.start_seconds - 1e-15);
  const double t_last = g.start_time_seconds + (g.size() - 1) * dt;
  CHECK(t_last < hop.start_seconds + hop.duration_seconds);
  // no dead zeros padded on either end beyond one sample
  CHECK(std::abs(g.samples[0]) >= 0.0);

  const ComplexSignal g2 = synthesize_baseband_hop(radio, hop, dt);
  CHECK((g.samples - g2.samples).norm() == 0.0);

  // an undersampled request cannot represent the pulse band
  CHECK_THROWS_AS(synthesize_baseband_hop(radio, hop, 1.0), InvalidArgument);

  // energy concentration: the trapezoid ramps leak a couple percent of the
  // energy outside +-B at 1 ms hops, so the gate here is a sanity bound, not
  // a tight spectral mask
  ComplexSignal padded = g;
  const double out = out_of_band_fraction(padded, 0.0, 25e3);
  CHECK(out < 0.05);
  const double out_half = out_of_band_fraction(padded, 0.0, 12.5e3);
  CHECK(out_half < 0.25);
  CHECK(out < out_half);
}

TEST_CASE("fh synthesis: empty class is silence") {
  FhClassParams params;
  params.radio_count = 0;
  params.max_hop_bandwidth_hz = 25e3;
  params.min_hri_seconds = 1e-3;
  auto [x, hops] = synthesize_fh_signal(params, {}, 4e-3, 1e-6);
  CHECK(x.size() == 4000);
  CHECK(x.samples.norm() == 0.0);
  CHECK(hops.empty());
}

TEST_CASE("fh synthesis: one radio matches the pointwise hop oracle") {
  FhClassParams params;
  params.radio_count = 1;
  params.max_hop_bandwidth_hz = 25e3;
  params.min_hri_seconds = 1e-3;
  RadioConfig radio = test_radio(11);
  const double dt = 1e-6, duration = 5e-3;
  auto [x, hops] = synthesize_fh_signal(params, {radio}, duration, dt);
  REQUIRE(!hops.empty());

  for (const auto& hop : hops) {
    CHECK(hop.start_seconds ==
          doctest::Approx(hop.hop_index * radio.hri_seconds +
                          radio.delay_seconds)
              .epsilon(1e-12));
    CHECK(hop.carrier_hz >= radio.freq_min_hz);
    CHECK(hop.carrier_hz <= radio.freq_max_hz);
    CHECK(hop.duration_seconds ==
          doctest::Approx(0.95 * radio.hri_seconds).epsilon(1e-12));
  }

  // pick an interior hop and verify x = g * exp(j(2 pi f t + theta)) sample
  // by sample, using the standalone hop synthesizer as the baseband oracle
  const HopRecord& hop = hops[hops.size() / 2];
  REQUIRE(hop.hop_index >= 1);
  const ComplexSignal g = synthesize_baseband_hop(radio, hop, dt);
  double max_err = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    const double t = g.start_time_seconds + i * dt;
    const Index k = static_cast<Index>(std::llround(t / dt));
    if (k < 0 || k >= x.size()) continue;
    const cplx expected =
        g.samples[i] *
        std::polar(1.0, 2.0 * M_PI * hop.carrier_hz * t + hop.phase_rad);
    max_err = std::max(max_err, std::abs(x.samples[k] - expected));
  }
  CHECK(max_err < 1e-12);
}

TEST_CASE("fh synthesis: additive over radio subsets with shared seeds") {
  FhClassParams one;
  one.radio_count = 1;
  one.max_hop_bandwidth_hz = 25e3;
  one.min_hri_seconds = 1e-3;
  FhClassParams two = one;
  two.radio_count = 2;
  RadioConfig a = test_radio(3), b = test_radio(4, 1.3e-3);
  const double dt = 1e-6, duration = 5e-3;

  auto [xa, ha] = synthesize_fh_signal(one, {a}, duration, dt);
  auto [xb, hb] = synthesize_fh_signal(one, {b}, duration, dt);
  auto [xab, hab] = synthesize_fh_signal(two, {a, b}, duration, dt);
  (void)ha;
  (void)hb;
  CHECK(hab.size() > 0);
  CHECK((xab.samples - xa.samples - xb.samples).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fh synthesis: precondition checks") {
  FhClassParams params;
  params.radio_count = 1;
  params.max_hop_bandwidth_hz = 25e3;
  params.min_hri_seconds = 1e-3;
  RadioConfig radio = test_radio(1);
  // sample interval too coarse for span + bandwidth
  CHECK_THROWS_AS(synthesize_fh_signal(params, {radio}, 4e-3, 1e-2),
                  InvalidArgument);
  // radio count mismatch
  params.radio_count = 2;
  CHECK_THROWS_AS(synthesize_fh_signal(params, {radio}, 4e-3, 1e-6),
                  InvalidArgument);
}

TEST_CASE("multiband synthesis: slice-aligned bands occupy exactly their slices") {
  const int L = 8;
  const double dt = 1e-6;
  const Index n = 16384;
  // bands centered on slices 1 and 5, exactly one slice wide
  const double width = 1.0 / (L * dt);
  const std::vector<double> centers = {1.0 / (L * dt), (5.0 / L - 1.0) / dt};
  ComplexSignal x = synthesize_multiband_signal(centers, width,
                                                n * dt, dt, 42);
  REQUIRE(x.size() == n);
  CHECK(x.samples.norm() > 0.0);

  const VecC X = fft(x.samples);
  std::vector<double> slice_energy(L, 0.0);
  for (Index b = 0; b < n; ++b) {
    double nu = fft_freq(b, n);
    if (nu < 0) nu += 1.0;
    const int l = static_cast<int>(std::floor(nu * L + 0.5)) % L;
    slice_energy[static_cast<size_t>(l)] += std::norm(X[b]);
  }
  const double total = X.squaredNorm();
  CHECK(slice_energy[1] + slice_energy[5] > (1.0 - 1e-6) * total);
  for (int l : {0, 2, 3, 4, 6, 7})
    CHECK(slice_energy[static_cast<size_t>(l)] < 1e-6 * total);
}

TEST_CASE("multiband synthesis: empty, disjointness, determinism") {
  const double dt = 1e-6;
  ComplexSignal empty = synthesize_multiband_signal({}, 1e3, 1e-3, dt, 1);
  CHECK(empty.samples.norm() == 0.0);

  CHECK_THROWS_AS(synthesize_multiband_signal({0.0, 500.0}, 2e3, 1e-3, dt, 1),
                  InvalidArgument);

  ComplexSignal a = synthesize_multiband_signal({10e3}, 4e3, 1e-3, dt, 9);
  ComplexSignal b = synthesize_multiband_signal({10e3}, 4e3, 1e-3, dt, 9);
  CHECK((a.samples - b.samples).norm() == 0.0);
}

TEST_CASE("make_fh_radios: experiment factory wiring") {
  FhClassParams params;
  params.radio_count = 3;
  params.max_hop_bandwidth_hz = 25e3;
  params.min_hri_seconds = 1e-3;
  auto radios = make_fh_radios(params, 2e6, 10e-3, 99);
  REQUIRE(radios.size() == 3);
  std::set<std::uint64_t> seeds;
  for (const auto& r : radios) {
    CHECK(r.hri_seconds == params.min_hri_seconds);
    CHECK(r.symbol_rate == doctest::Approx(25e3 / 1.3));
    CHECK(r.freq_max_hz == 2e6);
    CHECK(r.hop_count >= 10);
    CHECK(r.delay_seconds < 0.0);  // drawn at synthesis time
    seeds.insert(r.seed);
  }
  CHECK(seeds.size() == 3);
}
