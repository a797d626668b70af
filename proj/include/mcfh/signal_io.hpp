#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcfh/fh_signal.hpp"
#include "mcfh/mc_sampler.hpp"
#include "mcfh/recovery.hpp"
#include "mcfh/types.hpp"

namespace mcfh {

// Binary signal format: 16-byte header (magic "MCFH", u32 format version,
// u64 sample count) followed by little-endian interleaved f64 (re, im)
// pairs. sample_interval / start_time live in a "<path>.meta" sidecar of
// key=value lines.
void write_signal(const std::string& path, const ComplexSignal& x);
ComplexSignal read_signal(const std::string& path);

void write_hop_csv(const std::string& path, const std::vector<HopRecord>& hops);
std::vector<HopRecord> read_hop_csv(const std::string& path);

// Coset streams directory: coset_<i>.sig per stream plus manifest.txt
// listing T_c, L, q, C and the origin time.
void write_coset_streams(const std::string& dir, const CosetStreams& streams);
CosetStreams read_coset_streams(const std::string& dir);

// Per-run recovery manifest CSV.
void write_recovery_manifest(const std::string& path,
                             const std::vector<SegmentSolution>& solutions);

// key=value text files (config echo, sidecars)
void write_kv(const std::string& path,
              const std::vector<std::pair<std::string, std::string>>& pairs);
std::map<std::string, std::string> read_kv(const std::string& path);

// git-style content hash: SHA-1 of "blob <size>\0" + bytes, hex-encoded.
std::string sha1_hex(const std::string& bytes);
std::string git_blob_hash(const std::string& file_path);

// CSV value formatting used everywhere results are emitted: shortest
// round-trippable decimal so reruns are byte-identical.
std::string format_double(double v);

}  // namespace mcfh
