#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace spm {

inline uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with explicit seeding. Every random draw in the project goes
// through one of these, derived from a root seed plus a fixed stream id, so
// runs are bit-reproducible across platforms (no std:: distributions).
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  // Derives an independent stream from (root, stream, index).
  static Rng stream(uint64_t root, uint64_t stream_id, uint64_t index = 0) {
    uint64_t x = root;
    x ^= 0x8000000000000000ULL + stream_id * 0x9e3779b97f4a7c15ULL;
    x = splitmix64(x);
    x ^= index * 0xd1342543de82ef95ULL;
    return Rng(splitmix64(x));
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller without caching: consumes two uniforms per draw, keeps the
  // serializable state to just the four words.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  // Uniform integer in [0, n). Modulo bias is negligible for our n.
  uint64_t below(uint64_t n) { return next() % n; }

  std::array<uint64_t, 4> state() const { return s_; }
  void set_state(const std::array<uint64_t, 4>& s) { s_ = s; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<uint64_t, 4> s_{};
};

// Fixed stream ids, one per source of randomness.
namespace streams {
constexpr uint64_t kParamInit = 1;
constexpr uint64_t kSample = 2;
constexpr uint64_t kLesion = 3;
constexpr uint64_t kShuffle = 4;
constexpr uint64_t kProtoInit = 5;
constexpr uint64_t kBench = 6;
constexpr uint64_t kGradCheck = 7;
}  // namespace streams

}  // namespace spm
