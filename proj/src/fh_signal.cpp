#include "mcfh/fh_signal.hpp"

#include <algorithm>
#include <cmath>

#include "mcfh/fft_util.hpp"
#include "mcfh/rng.hpp"

namespace mcfh {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = 3.14159265358979323846 * x;
  return std::sin(px) / px;
}

// 4PSK constellation, unit modulus, rotated off the axes
const cplx kQpsk[4] = {
    cplx(0.7071067811865476, 0.7071067811865476),
    cplx(-0.7071067811865476, 0.7071067811865476),
    cplx(0.7071067811865476, -0.7071067811865476),
    cplx(-0.7071067811865476, -0.7071067811865476),
};

// Shared hop synthesis core: writes g_ik over dense indices [i0, i1) into
// out[i - i0] (no carrier). Symbol stream drawn from (seed, "hop", k+1) so the
// standalone hop op and the full synthesizer agree sample for sample.
void hop_baseband_into(const RadioConfig& cfg, const HopRecord& hop,
                       double dt, Index i0, Index i1, cplx* out) {
  const double ts = 1.0 / cfg.symbol_rate;
  const double beta = cfg.excess_bandwidth;
  const double th = hop.duration_seconds;
  auto rng = SubstreamRng::substream(cfg.seed, "hop",
                                     static_cast<std::uint64_t>(hop.hop_index + 1));
  // the carrier/phase draws happen first in the shared stream; burn them so
  // symbol draws line up whether or not the caller used them
  rng.uniform01();
  rng.uniform01();
  const long nsym = static_cast<long>(std::ceil(th / ts)) + 13;
  std::vector<cplx> syms(static_cast<size_t>(nsym));
  for (auto& s : syms) s = kQpsk[rng.uniform_index(4)];

  // pulses truncated to +-6 symbol periods; symbol s sits at (s-6)*ts so the
  // leading edge of the hop sees a full pulse stack
  for (Index i = i0; i < i1; ++i) {
    const double trel = static_cast<double>(i) * dt - hop.start_seconds;
    const double w = hop_window(trel, th);
    if (w == 0.0) {
      out[i - i0] = cplx(0, 0);
      continue;
    }
    // |trel - (s-6)*ts| <= 6*ts  =>  s in [trel/ts, trel/ts + 12]
    const long s_lo = std::max<long>(0, static_cast<long>(std::ceil(trel / ts)));
    const long s_hi = std::min<long>(nsym - 1, static_cast<long>(std::floor(trel / ts + 12.0)));
    cplx m(0, 0);
    for (long s = s_lo; s <= s_hi; ++s) {
      const double tau = trel - (static_cast<double>(s) - 6.0) * ts;
      if (std::abs(tau) <= 6.0 * ts)
        m += syms[static_cast<size_t>(s)] * raised_cosine_pulse(tau, ts, beta);
    }
    out[i - i0] = w * m;
  }
}

}  // namespace

double hop_window(double t_rel, double hop_duration) {
  require(hop_duration > 0.0, "hop_window: hop_duration must be positive");
  const double a = 0.05 * hop_duration;
  if (t_rel < 0.0 || t_rel >= hop_duration) return 0.0;
  if (t_rel < a) return t_rel / a;
  if (t_rel < hop_duration - a) return 1.0;
  return (hop_duration - t_rel) / a;
}

double raised_cosine_pulse(double t, double symbol_period, double beta) {
  const double x = t / symbol_period;
  const double denom = 1.0 - 4.0 * beta * beta * x * x;
  if (std::abs(denom) < 1e-8) {
    // removable singularity at t = Ts/(2*beta)
    return 3.14159265358979323846 / 4.0 * sinc(1.0 / (2.0 * beta));
  }
  return sinc(x) * std::cos(3.14159265358979323846 * beta * x) / denom;
}

ComplexSignal synthesize_baseband_hop(const RadioConfig& config,
                                      const HopRecord& hop,
                                      double sample_interval) {
  require(sample_interval > 0.0, "synthesize_baseband_hop: bad sample interval");
  const double bw = config.symbol_rate * (1.0 + config.excess_bandwidth);
  require(sample_interval <= 1.0 / (2.0 * bw),
          "synthesize_baseband_hop: sample interval does not resolve the hop bandwidth");
  const double dt = sample_interval;
  const Index i0 = static_cast<Index>(std::ceil(hop.start_seconds / dt));
  const Index i1 = static_cast<Index>(
      std::ceil((hop.start_seconds + hop.duration_seconds) / dt));
  ComplexSignal out;
  out.sample_interval_seconds = dt;
  out.start_time_seconds = static_cast<double>(i0) * dt;
  out.samples = VecC::Zero(std::max<Index>(0, i1 - i0));
  if (i1 > i0) hop_baseband_into(config, hop, dt, i0, i1, out.samples.data());
  return out;
}

std::pair<ComplexSignal, std::vector<HopRecord>> synthesize_fh_signal(
    const FhClassParams& params, const std::vector<RadioConfig>& radios,
    double duration_seconds, double sample_interval) {
  require(params.radio_count == static_cast<int>(radios.size()),
          "synthesize_fh_signal: radio list size != radio_count");
  require(duration_seconds > 0.0 && sample_interval > 0.0,
          "synthesize_fh_signal: duration and sample interval must be positive");
  double span = 0.0;
  for (const auto& r : radios) {
    require(r.hri_seconds > 0.0, "synthesize_fh_signal: nonpositive HRI");
    require(r.hri_seconds >= params.min_hri_seconds - 1e-12,
            "synthesize_fh_signal: radio HRI below class minimum T");
    require(r.freq_min_hz < r.freq_max_hz, "synthesize_fh_signal: empty freq range");
    require(r.delay_seconds <= r.hri_seconds,
            "synthesize_fh_signal: delay exceeds HRI");
    require(r.symbol_rate * (1.0 + r.excess_bandwidth) <=
                params.max_hop_bandwidth_hz * (1.0 + 1e-9),
            "synthesize_fh_signal: per-hop bandwidth exceeds class B");
    span = std::max(span, r.freq_max_hz);
  }
  require(sample_interval * (span + params.max_hop_bandwidth_hz) <= 1.0 + 1e-9,
          "synthesize_fh_signal: sample interval cannot represent the hop band");

  const double dt = sample_interval;
  const Index n = static_cast<Index>(std::llround(duration_seconds / dt));
  ComplexSignal x;
  x.sample_interval_seconds = dt;
  x.samples = VecC::Zero(n);
  std::vector<HopRecord> hops;

  std::vector<cplx> buf;
  for (int i = 0; i < static_cast<int>(radios.size()); ++i) {
    const RadioConfig& r = radios[i];
    const double ti = r.hri_seconds;
    double tau = r.delay_seconds;
    if (tau < 0.0)
      tau = SubstreamRng::substream(r.seed, "tau").uniform(0.0, ti);
    const double th = 0.95 * ti;
    // k = -1 covers [0, tau) so the record starts mid-hop instead of silent
    for (long k = -1; k < r.hop_count; ++k) {
      const double start = static_cast<double>(k) * ti + tau;
      if (start >= duration_seconds) break;
      if (start + th <= 0.0) continue;
      auto rng = SubstreamRng::substream(r.seed, "hop",
                                         static_cast<std::uint64_t>(k + 1));
      HopRecord h;
      h.radio_index = i;
      h.hop_index = k;
      h.carrier_hz = rng.uniform(r.freq_min_hz, r.freq_max_hz);
      h.phase_rad = rng.uniform(0.0, kTwoPi);
      h.start_seconds = start;
      h.duration_seconds = th;

      const Index i0 = std::max<Index>(0, static_cast<Index>(std::ceil(start / dt)));
      const Index i1 = std::min<Index>(n, static_cast<Index>(std::ceil((start + th) / dt)));
      if (i1 > i0) {
        buf.assign(static_cast<size_t>(i1 - i0), cplx(0, 0));
        hop_baseband_into(r, h, dt, i0, i1, buf.data());
        for (Index j = i0; j < i1; ++j) {
          const double t = static_cast<double>(j) * dt;
          x.samples[j] += buf[static_cast<size_t>(j - i0)] *
                          std::polar(1.0, kTwoPi * h.carrier_hz * t + h.phase_rad);
        }
        hops.push_back(h);
      }
    }
  }
  return {std::move(x), std::move(hops)};
}

ComplexSignal synthesize_multiband_signal(const std::vector<double>& band_centers_hz,
                                          double band_width_hz,
                                          double duration_seconds,
                                          double sample_interval,
                                          std::uint64_t seed) {
  require(sample_interval > 0.0 && duration_seconds > 0.0,
          "synthesize_multiband_signal: bad duration or interval");
  require(band_width_hz > 0.0 || band_centers_hz.empty(),
          "synthesize_multiband_signal: nonpositive band width");
  const double dt = sample_interval;
  const Index n = static_cast<Index>(std::llround(duration_seconds / dt));
  require(n > 0, "synthesize_multiband_signal: empty signal");

  // digital band [lo, lo + w) per center, wrap-aware disjointness check
  const double w = band_width_hz * dt;
  require(w <= 1.0, "synthesize_multiband_signal: band wider than Nyquist");
  std::vector<double> lows;
  for (double c : band_centers_hz) {
    double lo = c * dt - w / 2.0;
    lo -= std::floor(lo);  // reduce mod 1
    lows.push_back(lo);
  }
  for (size_t a = 0; a < lows.size(); ++a)
    for (size_t b = a + 1; b < lows.size(); ++b) {
      double d = lows[b] - lows[a];
      d -= std::floor(d);
      if (d < w || d > 1.0 - w)
        throw InvalidArgument("synthesize_multiband_signal: overlapping bands");
    }

  VecC spectrum = VecC::Zero(n);
  for (size_t b = 0; b < lows.size(); ++b) {
    auto rng = SubstreamRng::substream(seed, "band", b);
    for (Index k = 0; k < n; ++k) {
      double d = fft_freq(k, n) - lows[b];
      d -= std::floor(d);
      if (d < w) spectrum[k] += rng.normal_complex();
    }
  }
  ComplexSignal out;
  out.sample_interval_seconds = dt;
  out.samples = ifft(spectrum);
  return out;
}

double out_of_band_fraction(const ComplexSignal& x, double center_hz,
                            double half_width_hz) {
  require(x.size() > 0, "out_of_band_fraction: empty signal");
  const VecC spec = fft(x.samples);
  const double nu_c = center_hz * x.sample_interval_seconds;
  const double hw = half_width_hz * x.sample_interval_seconds;
  double inside = 0.0, total = 0.0;
  for (Index k = 0; k < spec.size(); ++k) {
    const double e = std::norm(spec[k]);
    total += e;
    double d = fft_freq(k, spec.size()) - nu_c + 0.5;
    d -= std::floor(d);
    if (std::abs(d - 0.5) <= hw) inside += e;
  }
  if (total == 0.0) return 0.0;
  return 1.0 - inside / total;
}

std::vector<RadioConfig> make_fh_radios(const FhClassParams& params,
                                        double span_hz, double duration_seconds,
                                        std::uint64_t master_seed) {
  std::vector<RadioConfig> radios;
  for (int i = 0; i < params.radio_count; ++i) {
    RadioConfig r;
    r.hri_seconds = params.min_hri_seconds;
    r.delay_seconds = -1.0;  // drawn from the radio's own stream
    r.freq_min_hz = 0.0;
    r.freq_max_hz = span_hz;
    r.symbol_rate = params.max_hop_bandwidth_hz / (1.0 + r.excess_bandwidth);
    r.hop_count = static_cast<long>(std::ceil(duration_seconds /
                                              params.min_hri_seconds)) + 1;
    r.seed = SubstreamRng::mix(master_seed, "radio", static_cast<std::uint64_t>(i));
    radios.push_back(r);
  }
  return radios;
}

}  // namespace mcfh
