#pragma once

// Fixtures and independent oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fieldclust/clustering.hpp"
#include "fieldclust/dissimilarity.hpp"
#include "fieldclust/hex.hpp"

namespace fieldclust::testing {

// ---------------------------------------------------------------- files

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "fieldclust-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- pcap

struct PcapPacket {
  std::uint16_t src_port = 40000;
  std::uint16_t dst_port = 123;
  bool tcp = false;
  Bytes payload;
  bool fragment = false;
};

inline void put16be(Bytes& b, std::uint16_t v) {
  b.push_back(std::uint8_t(v >> 8));
  b.push_back(std::uint8_t(v));
}

inline void put32(Bytes& b, std::uint32_t v, bool big_endian) {
  for (int i = 0; i < 4; ++i) {
    int shift = big_endian ? (3 - i) * 8 : i * 8;
    b.push_back(std::uint8_t(v >> shift));
  }
}

/// Ethernet/IPv4/UDP-or-TCP frame.
inline Bytes ethernet_frame(const PcapPacket& p) {
  Bytes l4;
  if (p.tcp) {
    put16be(l4, p.src_port);
    put16be(l4, p.dst_port);
    for (int i = 0; i < 8; ++i) l4.push_back(0);  // seq, ack
    l4.push_back(0x50);                           // data offset 5 words
    l4.push_back(0x18);
    put16be(l4, 0xffff);
    put16be(l4, 0);
    put16be(l4, 0);
  } else {
    put16be(l4, p.src_port);
    put16be(l4, p.dst_port);
    put16be(l4, std::uint16_t(8 + p.payload.size()));
    put16be(l4, 0);
  }
  l4.insert(l4.end(), p.payload.begin(), p.payload.end());

  Bytes ip{0x45, 0x00};
  put16be(ip, std::uint16_t(20 + l4.size()));
  put16be(ip, 0x1234);
  put16be(ip, p.fragment ? 0x2000 : 0x4000);
  ip.push_back(64);
  ip.push_back(p.tcp ? 6 : 17);
  put16be(ip, 0);
  for (std::uint8_t a : {10, 0, 0, 1, 10, 0, 0, 2}) ip.push_back(a);
  ip.insert(ip.end(), l4.begin(), l4.end());

  Bytes frame{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  put16be(frame, 0x0800);
  frame.insert(frame.end(), ip.begin(), ip.end());
  return frame;
}

inline Bytes pcap_file(const std::vector<Bytes>& frames, bool big_endian = false,
                       std::uint32_t link_type = 1) {
  Bytes b;
  put32(b, 0xa1b2c3d4, big_endian);
  b.push_back(big_endian ? 0 : 2);
  b.push_back(big_endian ? 2 : 0);
  b.push_back(big_endian ? 0 : 4);
  b.push_back(big_endian ? 4 : 0);
  put32(b, 0, big_endian);
  put32(b, 0, big_endian);
  put32(b, 65535, big_endian);
  put32(b, link_type, big_endian);
  std::uint32_t ts = 1318204800;
  for (const auto& f : frames) {
    put32(b, ts++, big_endian);
    put32(b, 250000, big_endian);
    put32(b, std::uint32_t(f.size()), big_endian);
    put32(b, std::uint32_t(f.size()), big_endian);
    b.insert(b.end(), f.begin(), f.end());
  }
  return b;
}

// ---------------------------------------------------------------- matrices

inline DissimilarityMatrix matrix_from(const std::vector<std::vector<double>>& full) {
  DissimilarityMatrix m(full.size());
  for (std::size_t i = 0; i < full.size(); ++i)
    for (std::size_t j = i + 1; j < full.size(); ++j) m.set(i, j, full[i][j]);
  return m;
}

inline DissimilarityMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  DissimilarityMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, u(rng));
  return m;
}

/// Blobs of `sizes` with within-blob dissimilarity `intra` and across-blob
/// dissimilarity `inter`, each scaled by a uniform factor in [lo, hi];
/// `outliers` isolated points sit at `inter` from everything.
inline DissimilarityMatrix two_scale_matrix(const std::vector<std::size_t>& sizes, std::size_t outliers,
                                            double intra, double inter, std::mt19937_64& rng,
                                            double lo = 0.8, double hi = 1.2) {
  std::vector<std::size_t> blob;
  for (std::size_t b = 0; b < sizes.size(); ++b)
    for (std::size_t i = 0; i < sizes[b]; ++i) blob.push_back(b);
  for (std::size_t o = 0; o < outliers; ++o) blob.push_back(sizes.size() + o);
  std::uniform_real_distribution<double> jitter(lo, hi);
  DissimilarityMatrix m(blob.size());
  for (std::size_t i = 0; i < blob.size(); ++i)
    for (std::size_t j = i + 1; j < blob.size(); ++j)
      m.set(i, j, std::min(1.0, (blob[i] == blob[j] ? intra : inter) * jitter(rng)));
  return m;
}

// ---------------------------------------------------------------- oracles

/// Straight-from-the-definition Canberra variants.
inline double oracle_canberra_equal(const Bytes& x, const Bytes& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double a = x[i], b = y[i];
    s += (a + b) == 0 ? 0.0 : std::fabs(a - b) / (a + b);
  }
  return s / double(x.size());
}

inline double oracle_canberra(Bytes u, Bytes v) {
  if (u.size() > v.size()) std::swap(u, v);
  double best = 2.0;
  for (std::size_t o = 0; o + u.size() <= v.size(); ++o)
    best = std::min(best, oracle_canberra_equal(u, Bytes(v.begin() + long(o), v.begin() + long(o + u.size()))));
  double m = double(u.size()), big = double(v.size());
  return (m * best + (big - m) * (1 - (m / big) * (1 - best))) / big;
}

/// Definition-level DBSCAN: core set by counting, core connectivity by
/// transitive closure, borders to their lowest-index core neighbor, labels by
/// lowest member. Returns per-point labels, -1 for noise.
inline std::vector<long> oracle_dbscan(const DissimilarityMatrix& d, double eps, std::size_t min_samples) {
  const std::size_t n = d.size();
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cnt = 0;
    for (std::size_t j = 0; j < n; ++j) cnt += d(i, j) <= eps;
    core[i] = cnt >= min_samples;
  }
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) reach[i][j] = core[i] && core[j] && (i == j || d(i, j) <= eps);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;
  std::vector<long> rep(n, -1);  // representative = lowest core in component
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j]) {
        rep[i] = long(j);
        break;
      }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (std::size_t c = 0; c < n; ++c)
      if (core[c] && c != i && d(i, c) <= eps) {
        rep[i] = rep[c];
        break;
      }
  }
  // Relabel by lowest member.
  std::map<long, long> relabel;
  std::vector<long> labels(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (rep[i] < 0) continue;
    auto it = relabel.emplace(rep[i], long(relabel.size())).first;
    labels[i] = it->second;
  }
  return labels;
}

struct PairOracle {
  std::uint64_t tp = 0, fp = 0, fn = 0, same_type = 0;
};

/// Enumerates every unordered pair. Noise points (label -1) count as
/// singletons: never together with anything.
inline PairOracle oracle_pairs(const std::vector<long>& cluster_of, const std::vector<std::string>& type_of) {
  PairOracle o;
  for (std::size_t a = 0; a < cluster_of.size(); ++a) {
    for (std::size_t b = a + 1; b < cluster_of.size(); ++b) {
      bool together = cluster_of[a] >= 0 && cluster_of[a] == cluster_of[b];
      bool same = type_of[a] == type_of[b];
      o.same_type += same;
      if (together && same) ++o.tp;
      if (together && !same) ++o.fp;
      if (!together && same) ++o.fn;
    }
  }
  return o;
}

inline double oracle_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
}

// ---------------------------------------------------------------- protocols

struct SyntheticTrace {
  std::string hexlines;
  std::string truth_json;
};

/// magic(4) | 32-bit big-endian counter | 8 lowercase chars | 4 random bytes
inline SyntheticTrace synthetic_protocol(std::size_t messages, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::uniform_int_distribution<int> byte(0, 255);
  SyntheticTrace t;
  std::string entries;
  for (std::size_t i = 0; i < messages; ++i) {
    Bytes p{0xca, 0xfe, 0xba, 0xbe};
    std::uint32_t counter = std::uint32_t(1000 + i);
    for (int s = 24; s >= 0; s -= 8) p.push_back(std::uint8_t(counter >> s));
    for (int c = 0; c < 8; ++c) p.push_back(std::uint8_t(letter(rng)));
    for (int c = 0; c < 4; ++c) p.push_back(std::uint8_t(byte(rng)));
    auto hex = to_hex(p);
    t.hexlines += hex + "\n";
    if (!entries.empty()) entries += ",\n";
    entries += R"({"payload":")" + hex +
               R"(","fields":[{"len":4,"type":"magic"},{"len":4,"type":"counter"},)"
               R"({"len":8,"type":"text"},{"len":4,"type":"random"}]})";
  }
  t.truth_json = "{\"segmenter\":\"ground-truth\",\"messages\":[\n" + entries + "]}\n";
  return t;
}

/// Two far apart 4-byte types of equal relative spread: A bytes in [20, 22],
/// B bytes in [200, 220].
inline SyntheticTrace two_type_protocol(std::size_t messages, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> a(20, 22);
  std::uniform_int_distribution<int> b(200, 220);
  SyntheticTrace t;
  std::string entries;
  for (std::size_t i = 0; i < messages; ++i) {
    Bytes p;
    for (int c = 0; c < 4; ++c) p.push_back(std::uint8_t(a(rng)));
    for (int c = 0; c < 4; ++c) p.push_back(std::uint8_t(b(rng)));
    auto hex = to_hex(p);
    t.hexlines += hex + "\n";
    if (!entries.empty()) entries += ",\n";
    entries += R"({"payload":")" + hex + R"(","fields":[{"len":4,"type":"A"},{"len":4,"type":"B"}]})";
  }
  t.truth_json = "{\"segmenter\":\"ground-truth\",\"messages\":[\n" + entries + "]}\n";
  return t;
}

/// Like two_type_protocol, but B alternates between two sub-ranges ([200, 205]
/// and [225, 230]) of equal density, which density clustering alone keeps
/// apart.
inline SyntheticTrace split_type_protocol(std::size_t messages, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> a(20, 22);
  std::uniform_int_distribution<int> low(200, 205);
  std::uniform_int_distribution<int> high(225, 230);
  SyntheticTrace t;
  std::string entries;
  for (std::size_t i = 0; i < messages; ++i) {
    Bytes p;
    for (int c = 0; c < 4; ++c) p.push_back(std::uint8_t(a(rng)));
    for (int c = 0; c < 4; ++c) p.push_back(std::uint8_t(i % 2 ? low(rng) : high(rng)));
    auto hex = to_hex(p);
    t.hexlines += hex + "\n";
    if (!entries.empty()) entries += ",\n";
    entries += R"({"payload":")" + hex + R"(","fields":[{"len":4,"type":"A"},{"len":4,"type":"B"}]})";
  }
  t.truth_json = "{\"segmenter\":\"ground-truth\",\"messages\":[\n" + entries + "]}\n";
  return t;
}

}  // namespace fieldclust::testing
