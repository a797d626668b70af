#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcfh/fh_signal.hpp"
#include "mcfh/mc_sampler.hpp"
#include "mcfh/preprocessing.hpp"
#include "mcfh/recovery.hpp"
#include "mcfh/types.hpp"

namespace mcfh {

// One experiment run: class params, sampler grid, segment sizes, solver and
// dictionary settings, trial count, master seed. All randomness (carriers,
// symbols, phases, patterns, per-trial replication) derives from master_seed
// via named substreams; reruns are byte-identical apart from wall-time
// columns.
struct ExperimentConfig {
  // signal class
  int radio_count = 2;                 // N
  double hop_bandwidth_hz = 25e3;      // B
  double min_hri_seconds = 1e-3;       // T
  double span_fraction = 1.0;          // carrier span = fraction * (1/T_c - B)

  // sampler
  double base_interval_seconds = 4e-7; // T_c
  int period = 32;                     // L
  std::vector<int> q_list;             // channel counts to sweep
  std::uint64_t pattern_seed = 1;
  int pattern_tries = 200;

  // recovery
  std::vector<Index> r_list;           // segment sizes; empty -> round(T/(2*T_c))
  SolverId solver = SolverId::somp;
  int max_sparsity = -1;               // -1 -> min(4N, q)
  double residual_tol = 1e-6;
  int music_p = -1;                    // blind
  double kd_factor = 4.0;

  // protocol
  double duration_seconds = 10e-3;
  int trials = 5;
  std::uint64_t master_seed = 1;
  double snr_db = std::numeric_limits<double>::infinity();  // no noise hook
  std::string out_dir;

  void validate() const;
  Index default_r() const;
  double span_hz() const;
};

// One aggregated grid point (means over trials).
struct NmseRecord {
  std::string solver = "somp";
  std::string dictionary = "none";
  int q = 0;
  Index r = 0;
  int trials = 0;
  double nmse = 0.0;
  double mean_support_size = 0.0;
  double mean_rank_z = 0.0;
  double mean_true_support = 0.0;
  double max_true_support = 0.0;
  double max_true_support_no_switch = 0.0;
  double wall_time_s = 0.0;  // summed solver wall time
};

// ||x_hat - x||^2 / ||x||^2 over the overlap of the two signals (aligned by
// start time; equal sample rates required).
double nmse(const ComplexSignal& x_hat, const ComplexSignal& x);

// Ground-truth evaluation helpers -------------------------------------------

// Slices intersected by [f - B/2, f + B/2] of every hop active in [t0, t1).
std::set<int> segment_true_support(const std::vector<HopRecord>& hops,
                                   double bandwidth_hz, double t0, double t1,
                                   int period, double base_interval);

// True if any single radio has two or more hops active in [t0, t1).
bool segment_has_switch(const std::vector<HopRecord>& hops, double t0, double t1);

// Full pipeline on one in-memory signal --------------------------------------

struct ChainOutcome {
  double nmse = 0.0;
  double mean_support_size = 0.0;
  double mean_rank_z = 0.0;
  double solver_wall_seconds = 0.0;
  double mean_true_support = 0.0;      // filled when hops are provided
  int max_true_support = 0;
  int max_true_support_no_switch = 0;
  int segments = 0;
  std::vector<SegmentSolution> solutions;
  ComplexSignal reconstructed;
  IndexInterval valid_range;
};

// sample -> interpolate -> segment -> recover -> reassemble -> score. The
// input is trimmed to a multiple of L; NMSE is evaluated on valid_range.
ChainOutcome run_recovery_chain(const ComplexSignal& x, const McConfig& config,
                                Index r, const RecoveryOptions& options,
                                const std::vector<HopRecord>* hops = nullptr,
                                double hop_bandwidth_hz = 0.0);

// Experiment drivers ---------------------------------------------------------
// Each writes its figure CSVs plus run_manifest.txt into cfg.out_dir (when
// set) and returns the records.

// NMSE and ground-truth support statistics versus segment size r.
std::vector<NmseRecord> run_nmse_vs_r(const ExperimentConfig& cfg);

// NMSE versus channel count q for both solvers at r = round(T/(2*T_c)).
std::vector<NmseRecord> run_nmse_vs_q(const ExperimentConfig& cfg);

// NMSE and solver latency versus q for dictionary modes
// {none, dpss@2N_DW_D, dpss@4N_DW_D}.
std::vector<NmseRecord> run_dpss_comparison(const ExperimentConfig& cfg);

// Magnitude-squared short-time FFT in dB (floored at -300); rows are FFT
// bins in natural order, columns are frames.
MatR spectrogram_data(const ComplexSignal& x, Index window, Index hop);

// Plumbing -------------------------------------------------------------------

void write_records_csv(const std::string& path,
                       const std::vector<NmseRecord>& records,
                       const std::vector<std::string>& columns);
void write_matrix_csv(const std::string& path, const MatR& m);

// Compare two CSV files ignoring any column whose header name contains
// "wall" (the only nondeterministic outputs).
bool csv_equal_ignoring_wall(const std::string& path_a,
                             const std::string& path_b);

}  // namespace mcfh
