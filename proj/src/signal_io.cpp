#include "mcfh/signal_io.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mcfh {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'F', 'H'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ofstream& out, const void* p, size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void get_bytes(std::ifstream& in, void* p, size_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  // %.17g round-trips doubles; trim to the shortest representation that
  // still round-trips so files stay readable
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v || (back != back && v != v)) break;
  }
  return buf;
}

void write_signal(const std::string& path, const ComplexSignal& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("write_signal: cannot open " + path);
  put_bytes(out, kMagic, 4);
  const std::uint32_t version = kVersion;
  put_bytes(out, &version, 4);
  const std::uint64_t count = static_cast<std::uint64_t>(x.size());
  put_bytes(out, &count, 8);
  for (Index i = 0; i < x.size(); ++i) {
    const double re = x.samples[i].real(), im = x.samples[i].imag();
    put_bytes(out, &re, 8);
    put_bytes(out, &im, 8);
  }
  if (!out) throw NumericalError("write_signal: write failed for " + path);
  write_kv(path + ".meta",
           {{"sample_interval", format_double(x.sample_interval_seconds)},
            {"start_time", format_double(x.start_time_seconds)}});
}

ComplexSignal read_signal(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("read_signal: cannot open " + path);
  char magic[4];
  get_bytes(in, magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw InvalidArgument("read_signal: bad magic in " + path);
  std::uint32_t version = 0;
  get_bytes(in, &version, 4);
  if (version != kVersion)
    throw InvalidArgument("read_signal: unsupported version in " + path);
  std::uint64_t count = 0;
  get_bytes(in, &count, 8);
  ComplexSignal x;
  x.samples.resize(static_cast<Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    double re, im;
    get_bytes(in, &re, 8);
    get_bytes(in, &im, 8);
    x.samples[static_cast<Index>(i)] = cplx(re, im);
  }
  if (!in) throw InvalidArgument("read_signal: truncated file " + path);
  auto meta = read_kv(path + ".meta");
  x.sample_interval_seconds = std::stod(meta.at("sample_interval"));
  if (auto it = meta.find("start_time"); it != meta.end())
    x.start_time_seconds = std::stod(it->second);
  return x;
}

void write_hop_csv(const std::string& path, const std::vector<HopRecord>& hops) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_hop_csv: cannot open " + path);
  out << "radio,hop,carrier_hz,phase_rad,start_s,duration_s\n";
  for (const auto& h : hops)
    out << h.radio_index << ',' << h.hop_index << ','
        << format_double(h.carrier_hz) << ',' << format_double(h.phase_rad)
        << ',' << format_double(h.start_seconds) << ','
        << format_double(h.duration_seconds) << '\n';
}

std::vector<HopRecord> read_hop_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("read_hop_csv: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<HopRecord> hops;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    HopRecord h;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    ss >> h.radio_index >> h.hop_index >> h.carrier_hz >> h.phase_rad >>
        h.start_seconds >> h.duration_seconds;
    if (ss.fail()) throw InvalidArgument("read_hop_csv: malformed row: " + line);
    hops.push_back(h);
  }
  return hops;
}

void write_coset_streams(const std::string& dir, const CosetStreams& streams) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::string pattern;
  for (size_t i = 0; i < streams.config.pattern.size(); ++i)
    pattern += (i ? "," : "") + std::to_string(streams.config.pattern[i]);
  write_kv((fs::path(dir) / "manifest.txt").string(),
           {{"T_c", format_double(streams.config.base_interval_seconds)},
            {"L", std::to_string(streams.config.period)},
            {"q", std::to_string(streams.config.channel_count())},
            {"C", pattern},
            {"origin_time", format_double(streams.origin_time)}});
  for (size_t i = 0; i < streams.streams.size(); ++i) {
    ComplexSignal s;
    s.samples = streams.streams[i];
    s.sample_interval_seconds =
        streams.config.base_interval_seconds * streams.config.period;
    s.start_time_seconds =
        streams.origin_time +
        streams.config.pattern[i] * streams.config.base_interval_seconds;
    char name[32];
    std::snprintf(name, sizeof(name), "coset_%02zu.sig", i);
    write_signal((fs::path(dir) / name).string(), s);
  }
}

CosetStreams read_coset_streams(const std::string& dir) {
  namespace fs = std::filesystem;
  auto manifest = read_kv((fs::path(dir) / "manifest.txt").string());
  CosetStreams out;
  out.config.base_interval_seconds = std::stod(manifest.at("T_c"));
  out.config.period = std::stoi(manifest.at("L"));
  out.origin_time = std::stod(manifest.at("origin_time"));
  std::istringstream ss(manifest.at("C"));
  std::string tok;
  while (std::getline(ss, tok, ',')) out.config.pattern.push_back(std::stoi(tok));
  if (static_cast<int>(out.config.pattern.size()) != std::stoi(manifest.at("q")))
    throw InvalidArgument("read_coset_streams: q does not match pattern length");
  out.config.validate();
  for (size_t i = 0; i < out.config.pattern.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "coset_%02zu.sig", i);
    out.streams.push_back(read_signal((fs::path(dir) / name).string()).samples);
  }
  Index len = out.streams.front().size();
  for (auto& s : out.streams)
    if (s.size() != len)
      throw InvalidArgument("read_coset_streams: unequal stream lengths");
  return out;
}

void write_recovery_manifest(const std::string& path,
                             const std::vector<SegmentSolution>& solutions) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_recovery_manifest: cannot open " + path);
  out << "segment,start_index,solver,support_size,support_indices,residual,"
         "rank_Z,wall_time_s\n";
  for (const auto& s : solutions) {
    std::string idx;
    for (size_t i = 0; i < s.support.indices.size(); ++i)
      idx += (i ? " " : "") + std::to_string(s.support.indices[i]);
    out << s.segment_index << ',' << s.start_index << ','
        << (s.solver_id == SolverId::somp ? "somp" : "music") << ','
        << s.support.size() << ',' << idx << ','
        << format_double(s.residual_norm) << ',' << s.rank_z << ','
        << format_double(s.wall_time_seconds) << '\n';
  }
}

void write_kv(const std::string& path,
              const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_kv: cannot open " + path);
  for (const auto& [k, v] : pairs) out << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("read_kv: cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("read_kv: malformed line in " + path + ": " + line);
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Compact SHA-1 (for git-style content hashes of run inputs; not used for
// anything security-sensitive).
// ---------------------------------------------------------------------------

namespace {

struct Sha1 {
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                        0xC3D2E1F0u};
  std::uint64_t total = 0;
  std::array<std::uint8_t, 64> block{};
  size_t fill = 0;

  static std::uint32_t rol(std::uint32_t v, int s) {
    return (v << s) | (v >> (32 - s));
  }

  void process(const std::uint8_t* p) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 80; ++i)
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t t = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = t;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  void update(const void* data, size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    total += n;
    while (n > 0) {
      const size_t take = std::min(n, block.size() - fill);
      std::memcpy(block.data() + fill, p, take);
      fill += take;
      p += take;
      n -= take;
      if (fill == block.size()) {
        process(block.data());
        fill = 0;
      }
    }
  }

  std::string hex_digest() {
    const std::uint64_t bits = total * 8;
    const std::uint8_t one = 0x80;
    update(&one, 1);
    const std::uint8_t zero = 0;
    while (fill != 56) update(&zero, 1);
    for (int i = 7; i >= 0; --i) {
      const std::uint8_t b = static_cast<std::uint8_t>(bits >> (8 * i));
      update(&b, 1);
    }
    char out[41];
    for (int i = 0; i < 5; ++i)
      std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    return std::string(out, 40);
  }
};

}  // namespace

std::string sha1_hex(const std::string& bytes) {
  Sha1 s;
  s.update(bytes.data(), bytes.size());
  return s.hex_digest();
}

std::string git_blob_hash(const std::string& file_path) {
  std::ifstream in(file_path, std::ios::binary);
  if (!in) throw InvalidArgument("git_blob_hash: cannot open " + file_path);
  std::ostringstream content;
  content << in.rdbuf();
  const std::string body = content.str();
  Sha1 s;
  const std::string header = "blob " + std::to_string(body.size());
  s.update(header.data(), header.size() + 1);  // include the trailing NUL
  s.update(body.data(), body.size());
  return s.hex_digest();
}

}  // namespace mcfh
