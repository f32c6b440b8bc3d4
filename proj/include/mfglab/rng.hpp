#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mfglab {

// splitmix64 step; used to mix seeds for derived streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Labeled counter-based stream derivation: every module draws its randomness
// from a stream keyed by (root seed, label, indices). Identical keys give
// identical streams regardless of thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  std::uint64_t s = root ^ hash_label(label);
  return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t i0) {
  std::uint64_t s = root ^ hash_label(label);
  s = splitmix64(s) ^ (0x9e3779b97f4a7c15ULL * (i0 + 1));
  return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t i0,
                                 std::uint64_t i1) {
  std::uint64_t s = derive_seed(root, label, i0) ^ (0xb5297a4d3f2c6e29ULL * (i1 + 1));
  return splitmix64(s);
}

// Deterministic RNG stream: mt19937_64 core (output pinned by the standard)
// with an explicit Box-Muller normal so that draws do not depend on the
// standard library's distribution implementation.
class rng_stream {
 public:
  explicit rng_stream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0,1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  long uniform_index(long n) {
    // modulo bias negligible for n << 2^64
    return static_cast<long>(gen_() % static_cast<std::uint64_t>(n));
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mfglab
