#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mcfh/types.hpp"

namespace mcfh {

// One hopping radio. freq_range is the carrier draw interval in complex
// baseband terms (the generator works directly at baseband; an RF offset, if
// any, lives in file metadata only).
struct RadioConfig {
  long hop_count = 0;               // cap on hop index k (k < hop_count)
  double hri_seconds = 0.0;         // hop repetition interval T_i
  double delay_seconds = 0.0;       // tau_i, drawn if negative (see synth)
  double freq_min_hz = 0.0;
  double freq_max_hz = 0.0;
  double symbol_rate = 0.0;         // symbols/s
  double excess_bandwidth = 0.3;    // raised-cosine rolloff in [0,1]
  std::uint64_t seed = 0;
};

// Class-level parameters shared by all radios of one signal.
struct FhClassParams {
  int radio_count = 0;                    // N
  double max_hop_bandwidth_hz = 0.0;      // B
  double min_hri_seconds = 0.0;           // T (= min over radios of T_i)
  double essential_band_threshold = 1e-3; // epsilon; diagnostic, see note below
};

// Ground truth for one synthesized hop: start = hop_index * T_i + tau_i.
// hop_index may be -1 for the partial hop covering [0, tau_i) so records have
// no silent lead-in.
struct HopRecord {
  int radio_index = 0;
  long hop_index = 0;
  double carrier_hz = 0.0;
  double phase_rad = 0.0;
  double start_seconds = 0.0;
  double duration_seconds = 0.0;  // T_H
};

// Trapezoidal hop window: linear ramp on [0, 0.05*T_H), flat 1, linear ramp
// down on [0.95*T_H, T_H), zero elsewhere.
double hop_window(double t_rel_seconds, double hop_duration_seconds);

// Raised-cosine pulse p(t) with symbol period Ts and rolloff beta; p(0) = 1.
double raised_cosine_pulse(double t, double symbol_period, double beta);

// g_ik(t) = window * 4PSK raised-cosine pulse train, sampled on the hop's
// support [start, start + T_H); zero everywhere else by construction.
// Deterministic given config.seed and hop.hop_index.
ComplexSignal synthesize_baseband_hop(const RadioConfig& config,
                                      const HopRecord& hop,
                                      double sample_interval);

// x(t) = sum over radios/hops of g_ik(t - k*T_i - tau_i) *
// exp(j(2*pi*f_ik*t + theta_ik)), carriers continuous-uniform in
// [freq_min, freq_max] per hop. Returns the signal plus ground-truth records.
std::pair<ComplexSignal, std::vector<HopRecord>> synthesize_fh_signal(
    const FhClassParams& params, const std::vector<RadioConfig>& radios,
    double duration_seconds, double sample_interval);

// Stationary test input: sum of independent bandlimited complex-Gaussian
// noise processes, one per band (center in Hz, common width). Bands must be
// disjoint in digital frequency.
ComplexSignal synthesize_multiband_signal(const std::vector<double>& band_centers_hz,
                                          double band_width_hz,
                                          double duration_seconds,
                                          double sample_interval,
                                          std::uint64_t seed);

// Fraction of spectral energy outside the window
// |f - center| <= half_width (digital frequencies, modular distance).
// Used to report the essential-band condition: with the 5%-ramp trapezoid
// window this is a diagnostic, not a hard gate — the window skirts alone
// exceed tight thresholds at short hop durations.
double out_of_band_fraction(const ComplexSignal& x, double center_hz,
                            double half_width_hz);

// Convenience factory for experiment configs: N identical radios at
// HRI = T, symbol rate B/(1+beta), carriers uniform over [0, span_hz],
// per-radio seeds derived from master_seed.
std::vector<RadioConfig> make_fh_radios(const FhClassParams& params,
                                        double span_hz, double duration_seconds,
                                        std::uint64_t master_seed);

}  // namespace mcfh
