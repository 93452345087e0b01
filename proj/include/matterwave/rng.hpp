#pragma once
// deterministic rng for monte-carlo sampling: xoshiro256++ seeded via splitmix64.
// per-sample streams are derived from (master seed, sample index) so any
// partitioning of samples reproduces the same draws bit-for-bit.

#include <cmath>
#include <cstdint>

namespace matterwave {

struct splitmix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

class xoshiro256pp {
 public:
  static xoshiro256pp seeded(std::uint64_t seed) {
    splitmix64 sm{seed};
    xoshiro256pp g;
    for (auto& s : g.s_) s = sm.next();
    return g;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in (0, 1]; never 0 so log() below is safe
  double uniform01() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4] = {};
};

inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  splitmix64 sm{master ^ (index * 0xD1342543DE82EF95ULL + 0x9E3779B97F4A7C15ULL)};
  return sm.next();
}

class gaussian_stream {
 public:
  explicit gaussian_stream(std::uint64_t seed) : gen_(xoshiro256pp::seeded(seed)) {}

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = gen_.uniform01();
    const double u2 = gen_.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  xoshiro256pp gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace matterwave
