#include "mcfh/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mcfh/fft_util.hpp"
#include "mcfh/rng.hpp"
#include "mcfh/signal_io.hpp"

namespace mcfh {

namespace {
namespace fs = std::filesystem;
}

void ExperimentConfig::validate() const {
  require(radio_count >= 0, "ExperimentConfig: negative radio count");
  require(hop_bandwidth_hz > 0, "ExperimentConfig: B must be positive");
  require(min_hri_seconds > 0, "ExperimentConfig: T must be positive");
  require(base_interval_seconds > 0, "ExperimentConfig: T_c must be positive");
  require(period >= 1, "ExperimentConfig: L must be positive");
  for (int q : q_list)
    require(q >= 1 && q <= period, "ExperimentConfig: q outside [1, L]");
  for (Index r : r_list) require(r >= 1, "ExperimentConfig: r must be >= 1");
  require(trials >= 1, "ExperimentConfig: trials must be >= 1");
  require(duration_seconds >= 10.0 * min_hri_seconds - 1e-12,
          "ExperimentConfig: duration must be at least 10*T");
  require(span_fraction > 0.0 && span_fraction <= 1.0,
          "ExperimentConfig: span_fraction outside (0, 1]");
  require(kd_factor > 0.0, "ExperimentConfig: nonpositive kd_factor");
}

Index ExperimentConfig::default_r() const {
  return static_cast<Index>(
      std::llround(min_hri_seconds / (2.0 * base_interval_seconds)));
}

double ExperimentConfig::span_hz() const {
  return span_fraction * (1.0 / base_interval_seconds - hop_bandwidth_hz);
}

double nmse(const ComplexSignal& x_hat, const ComplexSignal& x) {
  require(x_hat.size() > 0 && x.size() > 0, "nmse: empty signal");
  require(std::abs(x_hat.sample_interval_seconds - x.sample_interval_seconds) <=
              1e-12 * x.sample_interval_seconds,
          "nmse: sample rates differ");
  const double dt = x.sample_interval_seconds;
  const long shift = std::lround((x_hat.start_time_seconds - x.start_time_seconds) / dt);
  // overlap in the reference signal's index space
  const Index lo = std::max<Index>(0, shift);
  const Index hi = std::min<Index>(x.size(), shift + x_hat.size());
  require(hi > lo, "nmse: signals do not overlap");
  const auto ref = x.samples.segment(lo, hi - lo);
  const auto est = x_hat.samples.segment(lo - shift, hi - lo);
  const double den = ref.squaredNorm();
  if (den == 0.0)
    throw UndefinedMetric("nmse: zero reference signal over the overlap");
  return (est - ref).squaredNorm() / den;
}

std::set<int> segment_true_support(const std::vector<HopRecord>& hops,
                                   double bandwidth_hz, double t0, double t1,
                                   int period, double base_interval) {
  std::set<int> support;
  for (const auto& h : hops) {
    if (h.start_seconds >= t1 || h.start_seconds + h.duration_seconds <= t0)
      continue;
    const double lo = (h.carrier_hz - bandwidth_hz / 2.0) * base_interval;
    const double hi = (h.carrier_hz + bandwidth_hz / 2.0) * base_interval;
    const long l0 = static_cast<long>(std::floor(lo * period + 0.5));
    const long l1 = static_cast<long>(std::floor(hi * period + 0.5));
    for (long l = l0; l <= l1; ++l)
      support.insert(static_cast<int>(((l % period) + period) % period));
  }
  return support;
}

bool segment_has_switch(const std::vector<HopRecord>& hops, double t0, double t1) {
  std::map<int, int> active;
  for (const auto& h : hops)
    if (h.start_seconds < t1 && h.start_seconds + h.duration_seconds > t0)
      if (++active[h.radio_index] >= 2) return true;
  return false;
}

ChainOutcome run_recovery_chain(const ComplexSignal& x, const McConfig& config,
                                Index r, const RecoveryOptions& options,
                                const std::vector<HopRecord>* hops,
                                double hop_bandwidth_hz) {
  config.validate();
  const auto streams = sample(x, config);
  const auto aligned = interpolate_and_align(streams);
  const auto segments = segment(aligned, r);
  const auto A = build_measurement_matrix(config);
  auto solutions = recover_segments(segments, A, options);

  ChainOutcome out;
  out.valid_range = aligned.valid_range;
  out.segments = static_cast<int>(solutions.size());
  for (const auto& s : solutions) {
    out.mean_support_size += s.support.size();
    out.mean_rank_z += s.rank_z;
    out.solver_wall_seconds += s.wall_time_seconds;
  }
  if (!solutions.empty()) {
    out.mean_support_size /= static_cast<double>(solutions.size());
    out.mean_rank_z /= static_cast<double>(solutions.size());
  }

  if (hops) {
    double acc = 0.0;
    for (const auto& s : solutions) {
      const double t0 = x.start_time_seconds +
                        static_cast<double>(s.start_index) * config.base_interval_seconds;
      const double t1 = t0 + static_cast<double>(s.width) * config.base_interval_seconds;
      const auto truth = segment_true_support(*hops, hop_bandwidth_hz, t0, t1,
                                              config.period,
                                              config.base_interval_seconds);
      const int size = static_cast<int>(truth.size());
      acc += size;
      out.max_true_support = std::max(out.max_true_support, size);
      if (!segment_has_switch(*hops, t0, t1))
        out.max_true_support_no_switch =
            std::max(out.max_true_support_no_switch, size);
    }
    if (!solutions.empty()) out.mean_true_support = acc / static_cast<double>(solutions.size());
  }

  out.reconstructed = reassemble(solutions, config, x.start_time_seconds);
  ComplexSignal reference;
  reference.sample_interval_seconds = x.sample_interval_seconds;
  reference.start_time_seconds =
      x.start_time_seconds +
      static_cast<double>(aligned.valid_range.begin) * config.base_interval_seconds;
  reference.samples = x.samples.segment(aligned.valid_range.begin,
                                        aligned.valid_range.length());
  out.nmse = nmse(out.reconstructed, reference);
  out.solutions = std::move(solutions);
  return out;
}

namespace {

// synthesize trial input (with optional white-noise hook)
std::pair<ComplexSignal, std::vector<HopRecord>> trial_signal(
    const ExperimentConfig& cfg, int trial) {
  FhClassParams params;
  params.radio_count = cfg.radio_count;
  params.max_hop_bandwidth_hz = cfg.hop_bandwidth_hz;
  params.min_hri_seconds = cfg.min_hri_seconds;
  const std::uint64_t trial_seed =
      SubstreamRng::mix(cfg.master_seed, "trial", static_cast<std::uint64_t>(trial));
  auto radios = make_fh_radios(params, cfg.span_hz(), cfg.duration_seconds,
                               trial_seed);
  auto [x, hops] = synthesize_fh_signal(params, radios, cfg.duration_seconds,
                                        cfg.base_interval_seconds);
  if (std::isfinite(cfg.snr_db) && x.size() > 0) {
    const double power = x.samples.squaredNorm() / static_cast<double>(x.size());
    const double sigma =
        std::sqrt(power * std::pow(10.0, -cfg.snr_db / 10.0) / 2.0);
    auto rng = SubstreamRng::substream(cfg.master_seed, "noise",
                                       static_cast<std::uint64_t>(trial));
    for (Index i = 0; i < x.size(); ++i)
      x.samples[i] += sigma * rng.normal_complex();
  }
  return {std::move(x), std::move(hops)};
}

McConfig grid_config(const ExperimentConfig& cfg, int q) {
  McConfig mc;
  mc.base_interval_seconds = cfg.base_interval_seconds;
  mc.period = cfg.period;
  mc.pattern = choose_pattern(cfg.period, q,
                              SubstreamRng::mix(cfg.pattern_seed, "grid",
                                                static_cast<std::uint64_t>(q)),
                              cfg.pattern_tries);
  return mc;
}

RecoveryOptions recovery_options(const ExperimentConfig& cfg, int q,
                                 SolverId solver, DictionaryMode dict,
                                 double kd_factor) {
  RecoveryOptions opt;
  opt.solver = solver;
  opt.max_sparsity = cfg.max_sparsity >= 0
                         ? cfg.max_sparsity
                         : std::min(4 * std::max(cfg.radio_count, 1), q);
  opt.residual_tol = cfg.residual_tol;
  opt.music_p = cfg.music_p;
  opt.dictionary = dict;
  opt.kd_factor = kd_factor;
  return opt;
}

NmseRecord aggregate_point(const ExperimentConfig& cfg, int q, Index r,
                           SolverId solver, DictionaryMode dict,
                           double kd_factor) {
  const McConfig mc = grid_config(cfg, q);
  const RecoveryOptions opt = recovery_options(cfg, q, solver, dict, kd_factor);
  NmseRecord rec;
  rec.solver = solver == SolverId::somp ? "somp" : "music";
  if (dict == DictionaryMode::dpss) {
    std::ostringstream name;
    name << "dpss@" << kd_factor << "NW";
    rec.dictionary = name.str();
  }
  rec.q = q;
  rec.r = r;
  rec.trials = cfg.trials;
  for (int t = 0; t < cfg.trials; ++t) {
    auto [x, hops] = trial_signal(cfg, t);
    const auto outcome =
        run_recovery_chain(x, mc, r, opt, &hops, cfg.hop_bandwidth_hz);
    rec.nmse += outcome.nmse;
    rec.mean_support_size += outcome.mean_support_size;
    rec.mean_rank_z += outcome.mean_rank_z;
    rec.mean_true_support += outcome.mean_true_support;
    rec.max_true_support =
        std::max(rec.max_true_support, static_cast<double>(outcome.max_true_support));
    rec.max_true_support_no_switch =
        std::max(rec.max_true_support_no_switch,
                 static_cast<double>(outcome.max_true_support_no_switch));
    rec.wall_time_s += outcome.solver_wall_seconds;
  }
  rec.nmse /= cfg.trials;
  rec.mean_support_size /= cfg.trials;
  rec.mean_rank_z /= cfg.trials;
  rec.mean_true_support /= cfg.trials;
  return rec;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& experiment) {
  if (cfg.out_dir.empty()) return;
  std::vector<std::pair<std::string, std::string>> echo = {
      {"experiment", experiment},
      {"N", std::to_string(cfg.radio_count)},
      {"B", format_double(cfg.hop_bandwidth_hz)},
      {"T", format_double(cfg.min_hri_seconds)},
      {"span_fraction", format_double(cfg.span_fraction)},
      {"T_c", format_double(cfg.base_interval_seconds)},
      {"L", std::to_string(cfg.period)},
      {"pattern_seed", std::to_string(cfg.pattern_seed)},
      {"pattern_tries", std::to_string(cfg.pattern_tries)},
      {"solver", cfg.solver == SolverId::somp ? "somp" : "music"},
      {"max_sparsity", std::to_string(cfg.max_sparsity)},
      {"residual_tol", format_double(cfg.residual_tol)},
      {"music_p", std::to_string(cfg.music_p)},
      {"kd_factor", format_double(cfg.kd_factor)},
      {"duration", format_double(cfg.duration_seconds)},
      {"trials", std::to_string(cfg.trials)},
      {"master_seed", std::to_string(cfg.master_seed)},
      {"snr_db", std::isfinite(cfg.snr_db) ? format_double(cfg.snr_db) : "inf"},
  };
  std::string qs, rs;
  for (size_t i = 0; i < cfg.q_list.size(); ++i)
    qs += (i ? "," : "") + std::to_string(cfg.q_list[i]);
  for (size_t i = 0; i < cfg.r_list.size(); ++i)
    rs += (i ? "," : "") + std::to_string(cfg.r_list[i]);
  echo.push_back({"q_list", qs});
  echo.push_back({"r_list", rs});
  std::string canonical;
  for (const auto& [k, v] : echo) canonical += k + "=" + v + "\n";
  echo.push_back({"content_hash", sha1_hex(canonical)});
  write_kv((fs::path(cfg.out_dir) / "run_manifest.txt").string(), echo);
}

void ensure_out_dir(const ExperimentConfig& cfg) {
  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
}

}  // namespace

std::vector<NmseRecord> run_nmse_vs_r(const ExperimentConfig& cfg) {
  cfg.validate();
  require(!cfg.r_list.empty(), "run_nmse_vs_r: r_list must not be empty");
  std::vector<int> qs = cfg.q_list.empty() ? std::vector<int>{10} : cfg.q_list;
  std::vector<NmseRecord> records;
  for (int q : qs)
    for (Index r : cfg.r_list)
      records.push_back(aggregate_point(cfg, q, r, cfg.solver,
                                        DictionaryMode::none, cfg.kd_factor));
  ensure_out_dir(cfg);
  if (!cfg.out_dir.empty()) {
    write_records_csv((fs::path(cfg.out_dir) / "fig5a.csv").string(), records,
                      {"q", "r", "trials", "nmse", "mean_support_size",
                       "mean_rank_Z", "wall_time_s"});
    write_records_csv((fs::path(cfg.out_dir) / "fig5b.csv").string(), records,
                      {"q", "r", "trials", "mean_true_support",
                       "max_true_support", "max_true_support_no_switch"});
    write_manifest(cfg, "nmse_vs_r");
  }
  return records;
}

std::vector<NmseRecord> run_nmse_vs_q(const ExperimentConfig& cfg) {
  cfg.validate();
  require(!cfg.q_list.empty(), "run_nmse_vs_q: q_list must not be empty");
  const Index r = cfg.r_list.empty() ? cfg.default_r() : cfg.r_list.front();
  std::vector<NmseRecord> records;
  for (SolverId solver : {SolverId::somp, SolverId::music})
    for (int q : cfg.q_list)
      records.push_back(aggregate_point(cfg, q, r, solver,
                                        DictionaryMode::none, cfg.kd_factor));
  ensure_out_dir(cfg);
  if (!cfg.out_dir.empty()) {
    write_records_csv((fs::path(cfg.out_dir) / "fig6.csv").string(), records,
                      {"solver", "q", "r", "trials", "nmse",
                       "mean_support_size", "mean_rank_Z", "wall_time_s"});
    write_manifest(cfg, "nmse_vs_q");
  }
  return records;
}

std::vector<NmseRecord> run_dpss_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  require(!cfg.q_list.empty(), "run_dpss_comparison: q_list must not be empty");
  const Index r = cfg.r_list.empty() ? cfg.default_r() : cfg.r_list.front();
  std::vector<NmseRecord> records;
  struct Mode {
    DictionaryMode dict;
    double factor;
  };
  for (const Mode& m : {Mode{DictionaryMode::none, 0.0},
                        Mode{DictionaryMode::dpss, 2.0},
                        Mode{DictionaryMode::dpss, 4.0}})
    for (int q : cfg.q_list)
      records.push_back(
          aggregate_point(cfg, q, r, cfg.solver, m.dict, m.factor));
  ensure_out_dir(cfg);
  if (!cfg.out_dir.empty()) {
    write_records_csv((fs::path(cfg.out_dir) / "fig7.csv").string(), records,
                      {"dictionary", "q", "r", "trials", "nmse"});
    write_records_csv((fs::path(cfg.out_dir) / "fig8.csv").string(), records,
                      {"dictionary", "q", "r", "trials", "wall_time_s"});
    write_manifest(cfg, "dpss_comparison");
  }
  return records;
}

MatR spectrogram_data(const ComplexSignal& x, Index window, Index hop) {
  require(window >= 16, "spectrogram_data: window must be >= 16");
  require(hop >= 1, "spectrogram_data: hop must be >= 1");
  require(x.size() >= window, "spectrogram_data: signal shorter than window");
  const Index frames = 1 + (x.size() - window) / hop;
  MatR out(window, frames);
  VecC buf(window);
  VecR hann(window);
  for (Index i = 0; i < window; ++i)
    hann[i] = 0.5 - 0.5 * std::cos(6.283185307179586 * static_cast<double>(i) /
                                   static_cast<double>(window));
  for (Index f = 0; f < frames; ++f) {
    for (Index i = 0; i < window; ++i)
      buf[i] = x.samples[f * hop + i] * hann[i];
    const VecC spec = fft(buf);
    for (Index i = 0; i < window; ++i) {
      const double p = std::norm(spec[i]);
      out(i, f) = p > 0.0 ? std::max(10.0 * std::log10(p), -300.0) : -300.0;
    }
  }
  return out;
}

void write_records_csv(const std::string& path,
                       const std::vector<NmseRecord>& records,
                       const std::vector<std::string>& columns) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_records_csv: cannot open " + path);
  for (size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& rec : records) {
    for (size_t i = 0; i < columns.size(); ++i) {
      if (i) out << ',';
      const std::string& c = columns[i];
      if (c == "solver") out << rec.solver;
      else if (c == "dictionary") out << rec.dictionary;
      else if (c == "q") out << rec.q;
      else if (c == "r") out << rec.r;
      else if (c == "trials") out << rec.trials;
      else if (c == "nmse") out << format_double(rec.nmse);
      else if (c == "mean_support_size") out << format_double(rec.mean_support_size);
      else if (c == "mean_rank_Z") out << format_double(rec.mean_rank_z);
      else if (c == "mean_true_support") out << format_double(rec.mean_true_support);
      else if (c == "max_true_support") out << format_double(rec.max_true_support);
      else if (c == "max_true_support_no_switch")
        out << format_double(rec.max_true_support_no_switch);
      else if (c == "wall_time_s") out << format_double(rec.wall_time_s);
      else throw InvalidArgument("write_records_csv: unknown column " + c);
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const MatR& m) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_matrix_csv: cannot open " + path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

bool csv_equal_ignoring_wall(const std::string& path_a,
                             const std::string& path_b) {
  std::ifstream a(path_a), b(path_b);
  if (!a || !b) throw InvalidArgument("csv_equal_ignoring_wall: cannot open inputs");
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream ss(line);
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
  };
  std::string la, lb;
  if (!std::getline(a, la) || !std::getline(b, lb)) return false;
  const auto ha = split(la), hb = split(lb);
  if (ha != hb) return false;
  std::vector<bool> keep;
  for (const auto& name : ha)
    keep.push_back(name.find("wall") == std::string::npos);
  while (true) {
    const bool more_a = static_cast<bool>(std::getline(a, la));
    const bool more_b = static_cast<bool>(std::getline(b, lb));
    if (more_a != more_b) return false;
    if (!more_a) return true;
    const auto ra = split(la), rb = split(lb);
    if (ra.size() != rb.size() || ra.size() != keep.size()) return false;
    for (size_t i = 0; i < ra.size(); ++i)
      if (keep[i] && ra[i] != rb[i]) return false;
  }
}

}  // namespace mcfh
