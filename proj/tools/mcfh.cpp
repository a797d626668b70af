// mcfh: synthesize frequency-hopping test signals, acquire them with the
// simulated multi-coset sampler, recover them segment by segment, and run the
// canned experiment sweeps.
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "mcfh/experiments.hpp"
#include "mcfh/fh_signal.hpp"
#include "mcfh/mc_sampler.hpp"
#include "mcfh/preprocessing.hpp"
#include "mcfh/recovery.hpp"
#include "mcfh/rng.hpp"
#include "mcfh/signal_io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mcfh;

struct GenerateArgs {
  std::string mode = "fh";
  int N = 2;
  double B = 25e3;
  double T = 1e-3;
  double duration = 10e-3;
  double tc = 4e-7;
  double span_fraction = 1.0;
  std::uint64_t seed = 1;
  double snr_db = 0.0;
  bool have_snr = false;
  std::vector<double> band_centers;
  double band_width = 0.0;
  std::string out;
  std::string hops_csv;
};

int cmd_generate(const GenerateArgs& a) {
  ComplexSignal x;
  std::vector<HopRecord> hops;
  if (a.mode == "fh") {
    FhClassParams params;
    params.radio_count = a.N;
    params.max_hop_bandwidth_hz = a.B;
    params.min_hri_seconds = a.T;
    const double span = a.span_fraction * (1.0 / a.tc - a.B);
    auto radios = make_fh_radios(params, span, a.duration, a.seed);
    std::tie(x, hops) = synthesize_fh_signal(params, radios, a.duration, a.tc);
  } else if (a.mode == "multiband") {
    require(!a.band_centers.empty() && a.band_width > 0.0,
            "generate: multiband mode needs --band centers and --band-width");
    x = synthesize_multiband_signal(a.band_centers, a.band_width, a.duration,
                                    a.tc, a.seed);
  } else {
    throw InvalidArgument("generate: unknown mode " + a.mode);
  }
  if (a.have_snr && x.size() > 0) {
    const double power = x.samples.squaredNorm() / static_cast<double>(x.size());
    const double sigma = std::sqrt(power * std::pow(10.0, -a.snr_db / 10.0) / 2.0);
    auto rng = SubstreamRng::substream(a.seed, "noise");
    for (Index i = 0; i < x.size(); ++i) x.samples[i] += sigma * rng.normal_complex();
  }
  write_signal(a.out, x);
  if (!a.hops_csv.empty()) write_hop_csv(a.hops_csv, hops);
  std::cout << "wrote " << x.size() << " samples to " << a.out << " (hash "
            << git_blob_hash(a.out) << ")\n";
  return 0;
}

struct SampleArgs {
  int L = 32;
  int q = 10;
  double tc = 0.0;  // 0: take from the input signal
  std::uint64_t pattern_seed = 1;
  std::string pattern;
  std::string in;
  std::string out_dir;
};

int cmd_sample(const SampleArgs& a) {
  ComplexSignal x = read_signal(a.in);
  McConfig cfg;
  cfg.base_interval_seconds = a.tc > 0.0 ? a.tc : x.sample_interval_seconds;
  cfg.period = a.L;
  if (!a.pattern.empty()) {
    std::istringstream ss(a.pattern);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.pattern.push_back(std::stoi(tok));
  } else {
    cfg.pattern = random_pattern(a.L, a.q, a.pattern_seed);
  }
  auto streams = sample(x, cfg);
  write_coset_streams(a.out_dir, streams);
  std::cout << "wrote " << streams.streams.size() << " coset streams of "
            << streams.length() << " samples to " << a.out_dir << "\n";
  return 0;
}

struct RecoverArgs {
  std::string cosets_dir;
  std::string solver = "somp";
  Index r = 250;
  int max_sparsity = 8;
  double tol = 1e-6;
  int music_p = -1;
  std::string dict = "none";
  double kd_factor = 4.0;
  std::string out_dir;
  std::string reference;
};

int cmd_recover(const RecoverArgs& a) {
  CosetStreams streams = read_coset_streams(a.cosets_dir);
  RecoveryOptions opt;
  if (a.solver == "somp") opt.solver = SolverId::somp;
  else if (a.solver == "music") opt.solver = SolverId::music;
  else throw InvalidArgument("recover: unknown solver " + a.solver);
  opt.max_sparsity = a.max_sparsity;
  opt.residual_tol = a.tol;
  opt.music_p = a.music_p;
  if (a.dict == "dpss") opt.dictionary = DictionaryMode::dpss;
  else if (a.dict != "none") throw InvalidArgument("recover: unknown dictionary " + a.dict);
  opt.kd_factor = a.kd_factor;

  const auto aligned = interpolate_and_align(streams);
  const auto segments = segment(aligned, a.r);
  const auto A = build_measurement_matrix(streams.config);
  const auto solutions = recover_segments(segments, A, opt);
  const auto xhat = reassemble(solutions, streams.config, streams.origin_time);

  fs::create_directories(a.out_dir);
  write_recovery_manifest((fs::path(a.out_dir) / "recovery.csv").string(),
                          solutions);
  write_signal((fs::path(a.out_dir) / "xhat.sig").string(), xhat);
  std::cout << "recovered " << solutions.size() << " segments -> " << a.out_dir
            << "\n";
  if (!a.reference.empty()) {
    const ComplexSignal ref = read_signal(a.reference);
    std::cout << "nmse vs reference: " << format_double(nmse(xhat, ref)) << "\n";
  }
  return 0;
}

void add_experiment_flags(CLI::App* cmd, ExperimentConfig* cfg,
                          std::vector<Index>* r_list) {
  cmd->add_option("--N", cfg->radio_count, "number of hopping radios");
  cmd->add_option("--B", cfg->hop_bandwidth_hz, "hop bandwidth in Hz");
  cmd->add_option("--T", cfg->min_hri_seconds, "minimum hop repetition interval (s)");
  cmd->add_option("--tc", cfg->base_interval_seconds, "base sampling interval (s)");
  cmd->add_option("--L", cfg->period, "sampler period");
  cmd->add_option("--q", cfg->q_list, "channel counts to sweep")->delimiter(',');
  cmd->add_option("--r", *r_list, "segment sizes")->delimiter(',');
  cmd->add_option("--trials", cfg->trials, "trials per grid point");
  cmd->add_option("--duration", cfg->duration_seconds, "signal duration (s)");
  cmd->add_option("--seed", cfg->master_seed, "master seed");
  cmd->add_option("--pattern-seed", cfg->pattern_seed, "coset pattern seed");
  cmd->add_option("--max-sparsity", cfg->max_sparsity,
                  "greedy sparsity cap (-1: min(4N, q))");
  cmd->add_option("--tol", cfg->residual_tol, "solver residual tolerance");
  cmd->add_option("--snr", cfg->snr_db, "add white noise at this SNR (dB)");
  cmd->add_option("--span-fraction", cfg->span_fraction,
                  "carrier span as a fraction of the representable band");
  cmd->add_option("--out-dir", cfg->out_dir, "output directory")->required();
}

struct SpectrogramArgs {
  std::string in;
  Index window = 256;
  Index hop = 64;
  std::string out;
};

int cmd_spectrogram(const SpectrogramArgs& a) {
  const ComplexSignal x = read_signal(a.in);
  const MatR grid = spectrogram_data(x, a.window, a.hop);
  write_matrix_csv(a.out, grid);
  std::cout << "wrote " << grid.rows() << "x" << grid.cols()
            << " spectrogram grid to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-coset frequency-hopping recovery toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file ([subcommand] sections)");
  app.get_config_formatter_base()->valueSeparator('=');

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "synthesize a test signal");
  g->add_option("--mode", gen.mode, "fh | multiband");
  g->add_option("--N", gen.N, "number of radios");
  g->add_option("--B", gen.B, "hop bandwidth (Hz)");
  g->add_option("--T", gen.T, "minimum hop repetition interval (s)");
  g->add_option("--duration", gen.duration, "duration (s)");
  g->add_option("--tc", gen.tc, "sample interval (s)");
  g->add_option("--span-fraction", gen.span_fraction,
                "carrier span as a fraction of the representable band");
  g->add_option("--seed", gen.seed, "seed");
  auto* snr_opt = g->add_option("--snr", gen.snr_db, "add white noise at this SNR (dB)");
  g->add_option("--band", gen.band_centers, "multiband: band center (Hz), repeatable");
  g->add_option("--band-width", gen.band_width, "multiband: band width (Hz)");
  g->add_option("--out", gen.out, "output signal path")->required();
  g->add_option("--hops", gen.hops_csv, "write hop ground truth CSV here");

  SampleArgs smp;
  auto* s = app.add_subcommand("sample", "multi-coset sample a dense signal");
  s->add_option("--L", smp.L, "sampler period")->required();
  s->add_option("--q", smp.q, "number of cosets");
  s->add_option("--tc", smp.tc, "base interval (s); default: input rate");
  s->add_option("--pattern-seed", smp.pattern_seed, "random pattern seed");
  s->add_option("--pattern", smp.pattern, "explicit pattern, e.g. 0,3,11");
  s->add_option("--in", smp.in, "input signal")->required();
  s->add_option("--out-dir", smp.out_dir, "output directory")->required();

  RecoverArgs rec;
  auto* r = app.add_subcommand("recover", "recover from coset streams");
  r->add_option("--in", rec.cosets_dir, "coset streams directory")->required();
  r->add_option("--solver", rec.solver, "somp | music");
  r->add_option("--r", rec.r, "segment size");
  r->add_option("--max-sparsity", rec.max_sparsity, "greedy sparsity cap");
  r->add_option("--tol", rec.tol, "residual tolerance");
  r->add_option("--music-p", rec.music_p, "subspace rank (-1: blind estimate)");
  r->add_option("--dict", rec.dict, "none | dpss");
  r->add_option("--kd-factor", rec.kd_factor, "k_D = ceil(factor * N_D * W_D)");
  r->add_option("--out-dir", rec.out_dir, "output directory")->required();
  r->add_option("--reference", rec.reference, "dense reference signal for NMSE");

  ExperimentConfig exp_r_cfg, exp_q_cfg, exp_d_cfg;
  auto* er = app.add_subcommand("exp-nmse-r", "NMSE / support size vs segment size");
  add_experiment_flags(er, &exp_r_cfg, &exp_r_cfg.r_list);
  auto* eq = app.add_subcommand("exp-nmse-q", "NMSE vs channel count, both solvers");
  add_experiment_flags(eq, &exp_q_cfg, &exp_q_cfg.r_list);
  auto* ed = app.add_subcommand("exp-dpss", "dictionary NMSE and latency vs q");
  add_experiment_flags(ed, &exp_d_cfg, &exp_d_cfg.r_list);

  SpectrogramArgs spec;
  auto* sp = app.add_subcommand("spectrogram", "emit magnitude STFT grid as CSV");
  sp->add_option("--in", spec.in, "input signal")->required();
  sp->add_option("--window", spec.window, "FFT window length");
  sp->add_option("--hop", spec.hop, "frame hop");
  sp->add_option("--out", spec.out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*g) {
      gen.have_snr = snr_opt->count() > 0;
      return cmd_generate(gen);
    }
    if (*s) return cmd_sample(smp);
    if (*r) return cmd_recover(rec);
    auto report = [](const std::vector<NmseRecord>& records) {
      for (const auto& rec2 : records)
        std::cout << rec2.solver << " " << rec2.dictionary << " q=" << rec2.q
                  << " r=" << rec2.r << " nmse=" << format_double(rec2.nmse)
                  << "\n";
      return 0;
    };
    if (*er) return report(run_nmse_vs_r(exp_r_cfg));
    if (*eq) return report(run_nmse_vs_q(exp_q_cfg));
    if (*ed) return report(run_dpss_comparison(exp_d_cfg));
    if (*sp) return cmd_spectrogram(spec);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what();
    if (e.segment_index >= 0) std::cerr << " [segment " << e.segment_index << "]";
    std::cerr << "\n";
    return 3;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const UndefinedMetric& e) {
    std::cerr << "undefined metric: " << e.what() << "\n";
    return 2;
  } catch (const Unsupported& e) {
    std::cerr << "unsupported request: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
