#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "mcfh/experiments.hpp"
#include "mcfh/fh_signal.hpp"
#include "mcfh/mc_sampler.hpp"
#include "mcfh/signal_io.hpp"

using namespace mcfh;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& leaf) {
  auto p = fs::temp_directory_path() / "mcfh_exp_tests" / leaf;
  fs::create_directories(p);
  return p;
}

ComplexSignal tone(Index n, double nu, double dt = 1.0) {
  ComplexSignal x;
  x.sample_interval_seconds = dt;
  x.samples = VecC(n);
  for (Index k = 0; k < n; ++k)
    x.samples[k] = std::polar(1.0, 2.0 * M_PI * nu * static_cast<double>(k));
  return x;
}

// small-but-real hopping scene: two radios over 10 ms at 2.5 MHz
std::pair<ComplexSignal, std::vector<HopRecord>> small_scene(std::uint64_t seed) {
  FhClassParams params;
  params.radio_count = 2;
  params.max_hop_bandwidth_hz = 25e3;
  params.min_hri_seconds = 1e-3;
  const double dt = 4e-7;
  const double duration = 10e-3;
  const double span = 0.9 * (1.0 / dt - params.max_hop_bandwidth_hz);
  auto radios = make_fh_radios(params, span, duration, seed);
  return synthesize_fh_signal(params, radios, duration, dt);
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("nmse matches hand values") {
  ComplexSignal x = tone(64, 0.21, 1e-3);

  ComplexSignal same = x;
  CHECK(nmse(same, x) == 0.0);

  ComplexSignal zero = x;
  zero.samples.setZero();
  CHECK(nmse(zero, x) == doctest::Approx(1.0).epsilon(1e-12));

  ComplexSignal scaled = x;
  scaled.samples *= 1.0 + 1e-3;
  CHECK(std::abs(nmse(scaled, x) - 1e-6) < 1e-12);

  CHECK_THROWS_AS(nmse(x, zero), UndefinedMetric);
}

TEST_CASE("nmse aligns by start time and rejects bad pairs") {
  ComplexSignal x = tone(100, 0.37, 1e-3);

  // estimate covering samples [20, 70) of the reference, declared via start_time
  ComplexSignal part;
  part.sample_interval_seconds = x.sample_interval_seconds;
  part.start_time_seconds = x.start_time_seconds + 20 * 1e-3;
  part.samples = x.samples.segment(20, 50);
  CHECK(nmse(part, x) < 1e-28);

  part.samples[10] += cplx(1.0, 0.0);
  CHECK(nmse(part, x) > 1e-3);

  ComplexSignal outside = part;
  outside.start_time_seconds = x.start_time_seconds + 1.0;
  CHECK_THROWS_AS(nmse(outside, x), InvalidArgument);

  ComplexSignal wrong_rate = part;
  wrong_rate.sample_interval_seconds *= 2.0;
  CHECK_THROWS_AS(nmse(wrong_rate, x), InvalidArgument);
}

TEST_CASE("segment true support collects slices of active hops") {
  // base interval 1 s, 8 slices: carrier nu maps to slice floor(nu*8 + 0.5) mod 8
  std::vector<HopRecord> hops = {
      {0, 0, 0.125, 0.0, 0.0, 0.5},    // slice 1
      {1, 0, 0.3125, 0.0, 0.0, 0.5},   // straddles slices 2 and 3
      {0, 1, -0.125, 0.0, 0.6, 0.4},   // negative carrier -> slice 7
  };
  const double B = 0.01;
  CHECK(segment_true_support(hops, B, 0.0, 0.5, 8, 1.0) ==
        std::set<int>{1, 2, 3});
  CHECK(segment_true_support(hops, B, 0.55, 1.0, 8, 1.0) == std::set<int>{7});
  // hop 0 ends exactly at 0.5 so a window starting there excludes it
  CHECK(segment_true_support(hops, B, 0.5, 0.65, 8, 1.0) == std::set<int>{7});
  CHECK(segment_true_support(hops, B, 2.0, 3.0, 8, 1.0).empty());
}

TEST_CASE("segment switch detector needs two hops of one radio") {
  std::vector<HopRecord> hops = {
      {0, 0, 0.1, 0.0, 0.0, 0.5},
      {1, 0, 0.2, 0.0, 0.0, 0.5},
      {0, 1, 0.3, 0.0, 0.6, 0.4},
  };
  CHECK(!segment_has_switch(hops, 0.0, 0.5));   // two radios, one hop each
  CHECK(segment_has_switch(hops, 0.4, 0.7));    // radio 0 hops inside window
  CHECK(!segment_has_switch(hops, 0.55, 1.0));
}

TEST_CASE("full-rate chain reproduces the input on the valid range") {
  auto [x, hops] = small_scene(41);
  REQUIRE(x.size() == 25000);

  McConfig mc;
  mc.base_interval_seconds = x.sample_interval_seconds;
  mc.period = 8;
  mc.pattern = {0, 1, 2, 3, 4, 5, 6, 7};

  RecoveryOptions opt;
  opt.solver = SolverId::somp;
  opt.max_sparsity = 8;
  opt.residual_tol = 1e-6;

  const auto out = run_recovery_chain(x, mc, 625, opt, &hops, 25e3);
  // valid range [512, 24488) of 23976 samples -> 38 full windows plus a tail
  CHECK(out.segments == 39);
  CHECK(out.valid_range.begin == 512);
  CHECK(out.valid_range.end == 25000 - 512);
  CHECK(out.reconstructed.size() == 23976);
  CHECK(out.reconstructed.start_time_seconds ==
        doctest::Approx(x.start_time_seconds + 512 * 4e-7));
  CHECK(out.nmse < 1e-8);

  // ground-truth occupancy statistics ride along when hop records are given
  CHECK(out.mean_true_support > 0.0);
  CHECK(out.max_true_support >= out.mean_true_support);
  CHECK(out.max_true_support_no_switch <= out.max_true_support);
  // 250 us windows see at most two hops per radio, two slices per hop
  CHECK(out.max_true_support <= 8);
  CHECK(out.max_true_support_no_switch <= 4);
}

TEST_CASE("information loss shows up as recovery error") {
  auto [x, hops] = small_scene(41);

  McConfig full;
  full.base_interval_seconds = x.sample_interval_seconds;
  full.period = 8;
  full.pattern = {0, 1, 2, 3, 4, 5, 6, 7};

  McConfig sub = full;
  sub.pattern = choose_pattern(8, 5, 11);

  RecoveryOptions opt;
  opt.solver = SolverId::somp;
  opt.max_sparsity = 4;  // below the worst-case occupancy on purpose
  opt.residual_tol = 1e-6;

  const auto exact = run_recovery_chain(x, full, 625, opt);
  const auto lossy = run_recovery_chain(x, sub, 625, opt);
  CHECK(exact.nmse < lossy.nmse);
  CHECK(lossy.nmse < 1.0);
  CHECK(lossy.mean_support_size <= 4.0);
}

TEST_CASE("spectrogram puts a pure tone in the right bin") {
  const Index window = 64, hop = 16;
  ComplexSignal x = tone(160, 5.0 / 64.0);
  const MatR s = spectrogram_data(x, window, hop);
  CHECK(s.rows() == window);
  CHECK(s.cols() == 1 + (160 - 64) / 16);
  for (Index f = 0; f < s.cols(); ++f) {
    Index best = 0;
    s.col(f).maxCoeff(&best);
    CHECK(best == 5);
  }

  // negative frequency lands in the mirrored bin of the natural FFT order
  ComplexSignal y = tone(160, -5.0 / 64.0);
  const MatR sneg = spectrogram_data(y, window, hop);
  Index best = 0;
  sneg.col(0).maxCoeff(&best);
  CHECK(best == 64 - 5);
}

TEST_CASE("spectrogram floors silence and validates arguments") {
  ComplexSignal zero;
  zero.sample_interval_seconds = 1.0;
  zero.samples = VecC::Zero(128);
  const MatR s = spectrogram_data(zero, 32, 8);
  CHECK(s.minCoeff() == -300.0);
  CHECK(s.maxCoeff() == -300.0);

  ComplexSignal shorty = tone(20, 0.1);
  CHECK_THROWS_AS(spectrogram_data(shorty, 32, 8), InvalidArgument);
  CHECK_THROWS_AS(spectrogram_data(zero, 8, 4), InvalidArgument);
  CHECK_THROWS_AS(spectrogram_data(zero, 32, 0), InvalidArgument);
}

TEST_CASE("spectrogram ridge follows the hop carriers") {
  FhClassParams params;
  params.radio_count = 1;
  params.max_hop_bandwidth_hz = 25e3;
  params.min_hri_seconds = 1e-3;
  const double dt = 4e-7;
  const double duration = 4e-3;
  const double span = 0.9 * (1.0 / dt - params.max_hop_bandwidth_hz);
  auto radios = make_fh_radios(params, span, duration, 7);
  auto [x, hops] = synthesize_fh_signal(params, radios, duration, dt);

  const Index window = 256, hop = 64;
  const MatR s = spectrogram_data(x, window, hop);

  int checked = 0;
  for (Index f = 0; f < s.cols(); ++f) {
    const double t0 = x.start_time_seconds + static_cast<double>(f * hop) * dt;
    const double t1 = t0 + static_cast<double>(window) * dt;
    for (const auto& h : hops) {
      const double margin = 0.05 * h.duration_seconds;
      if (t0 < h.start_seconds + margin ||
          t1 > h.start_seconds + h.duration_seconds - margin)
        continue;
      Index best = 0;
      s.col(f).maxCoeff(&best);
      const long expect =
          ((std::lround(h.carrier_hz * dt * static_cast<double>(window)) %
            window) + window) % window;
      long d = std::labs(static_cast<long>(best) - expect);
      d = std::min(d, static_cast<long>(window) - d);
      CHECK(d <= 2);
      ++checked;
    }
  }
  CHECK(checked >= 5);
}

TEST_CASE("csv comparison ignores wall-time columns only") {
  const auto dir = temp_dir("csv");
  const auto a = (dir / "a.csv").string();
  const auto b = (dir / "b.csv").string();
  const auto c = (dir / "c.csv").string();
  const auto d = (dir / "d.csv").string();
  std::ofstream(a) << "q,nmse,wall_time_s\n4,0.5,1.25\n8,0.25,0.75\n";
  std::ofstream(b) << "q,nmse,wall_time_s\n4,0.5,9.9\n8,0.25,0.01\n";
  std::ofstream(c) << "q,nmse,wall_time_s\n4,0.5001,1.25\n8,0.25,0.75\n";
  std::ofstream(d) << "q,nmse,wall_time_s\n4,0.5,1.25\n";
  CHECK(csv_equal_ignoring_wall(a, b));
  CHECK(!csv_equal_ignoring_wall(a, c));
  CHECK(!csv_equal_ignoring_wall(a, d));
  CHECK_THROWS_AS(csv_equal_ignoring_wall(a, (dir / "nope.csv").string()),
                  InvalidArgument);
}

TEST_CASE("record and matrix csv writers") {
  const auto dir = temp_dir("writers");
  NmseRecord rec;
  rec.solver = "music";
  rec.q = 12;
  rec.r = 625;
  rec.trials = 3;
  rec.nmse = 0.125;
  const auto path = (dir / "records.csv").string();
  write_records_csv(path, {rec}, {"solver", "q", "r", "trials", "nmse"});
  CHECK(first_line(path) == "solver,q,r,trials,nmse");
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row == "music,12,625,3,0.125");
  CHECK_THROWS_AS(write_records_csv(path, {rec}, {"bogus"}), InvalidArgument);

  MatR m(2, 3);
  m << 1.0, 0.5, -2.0, 3.0, 4.0, 5.0;
  const auto mpath = (dir / "matrix.csv").string();
  write_matrix_csv(mpath, m);
  CHECK(first_line(mpath) == "1,0.5,-2");
}

TEST_CASE("experiment config validation and derived values") {
  ExperimentConfig cfg;
  cfg.q_list = {4};
  cfg.r_list = {128};
  cfg.period = 8;
  cfg.validate();

  CHECK(cfg.default_r() == 1250);  // round(1e-3 / (2 * 4e-7))
  cfg.span_fraction = 0.5;
  CHECK(cfg.span_hz() == doctest::Approx(0.5 * (2.5e6 - 25e3)));
  cfg.span_fraction = 1.0;

  auto bad = cfg;
  bad.duration_seconds = 5e-3;  // shorter than ten dwell intervals
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.q_list = {0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.q_list = {9};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.r_list = {0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.span_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("experiment drivers write their figure files") {
  ExperimentConfig cfg;
  cfg.radio_count = 2;
  cfg.period = 8;
  cfg.q_list = {5};
  cfg.r_list = {128, 256};
  cfg.trials = 1;
  cfg.duration_seconds = 10e-3;
  cfg.max_sparsity = 4;
  cfg.residual_tol = 1e-4;

  SUBCASE("nmse versus segment size") {
    cfg.out_dir = temp_dir("vs_r").string();
    const auto records = run_nmse_vs_r(cfg);
    REQUIRE(records.size() == 2);
    CHECK(records[0].r == 128);
    CHECK(records[1].r == 256);
    for (const auto& rec : records) {
      CHECK(rec.q == 5);
      CHECK(rec.trials == 1);
      CHECK(std::isfinite(rec.nmse));
      CHECK(rec.nmse >= 0.0);
      CHECK(rec.mean_true_support > 0.0);
      CHECK(rec.max_true_support >= rec.max_true_support_no_switch);
    }
    CHECK(first_line((fs::path(cfg.out_dir) / "fig5a.csv").string()) ==
          "q,r,trials,nmse,mean_support_size,mean_rank_Z,wall_time_s");
    CHECK(first_line((fs::path(cfg.out_dir) / "fig5b.csv").string()) ==
          "q,r,trials,mean_true_support,max_true_support,"
          "max_true_support_no_switch");
    const auto manifest =
        read_kv((fs::path(cfg.out_dir) / "run_manifest.txt").string());
    CHECK(manifest.at("experiment") == "nmse_vs_r");
    CHECK(manifest.at("content_hash").size() == 40);
    CHECK(manifest.at("r_list") == "128,256");
  }

  SUBCASE("nmse versus channel count runs both solvers") {
    cfg.out_dir = temp_dir("vs_q").string();
    cfg.r_list = {256};
    const auto records = run_nmse_vs_q(cfg);
    REQUIRE(records.size() == 2);
    CHECK(records[0].solver == "somp");
    CHECK(records[1].solver == "music");
    CHECK(records[0].r == 256);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "fig6.csv"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "run_manifest.txt"));
  }

  SUBCASE("dictionary comparison sweeps the three modes") {
    cfg.out_dir = temp_dir("dpss").string();
    cfg.r_list = {256};
    const auto records = run_dpss_comparison(cfg);
    REQUIRE(records.size() == 3);
    CHECK(records[0].dictionary == "none");
    CHECK(records[1].dictionary == "dpss@2NW");
    CHECK(records[2].dictionary == "dpss@4NW");
    for (const auto& rec : records) CHECK(std::isfinite(rec.nmse));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "fig7.csv"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "fig8.csv"));
  }
}

TEST_CASE("driver reruns are identical apart from wall time") {
  ExperimentConfig cfg;
  cfg.radio_count = 2;
  cfg.period = 8;
  cfg.q_list = {5};
  cfg.r_list = {128};
  cfg.trials = 1;
  cfg.duration_seconds = 10e-3;
  cfg.max_sparsity = 4;
  cfg.residual_tol = 1e-4;

  cfg.out_dir = temp_dir("rerun_a").string();
  run_nmse_vs_r(cfg);
  const auto dir_a = cfg.out_dir;
  cfg.out_dir = temp_dir("rerun_b").string();
  run_nmse_vs_r(cfg);

  CHECK(csv_equal_ignoring_wall((fs::path(dir_a) / "fig5a.csv").string(),
                                (fs::path(cfg.out_dir) / "fig5a.csv").string()));
  CHECK(csv_equal_ignoring_wall((fs::path(dir_a) / "fig5b.csv").string(),
                                (fs::path(cfg.out_dir) / "fig5b.csv").string()));
  const auto ma = read_kv((fs::path(dir_a) / "run_manifest.txt").string());
  const auto mb = read_kv((fs::path(cfg.out_dir) / "run_manifest.txt").string());
  CHECK(ma.at("content_hash") == mb.at("content_hash"));
}
