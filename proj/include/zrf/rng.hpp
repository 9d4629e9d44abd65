#pragma once

#include <cmath>
#include <cstdint>

namespace zrf {

// xoshiro256++ with splitmix64 seeding.  We roll our own generator and
// distributions so that trajectories are bit-identical for a given seed
// regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0) { reseed(seed, stream); }

  void reseed(uint64_t seed, uint64_t stream = 0) {
    uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    for (auto& si : s_) si = splitmix64(x);
    have_spare_ = false;
    // discard a few outputs in case of a weak seed
    for (int i = 0; i < 8; ++i) next();
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

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in {0,...,m-1} (m > 0); rejection keeps it exact
  uint64_t uniform_int(uint64_t m) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % m;
    uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % m;
  }

  double exponential(double rate) {
    // 1 - uniform() in (0,1], log is safe
    return -std::log1p(-uniform()) / rate;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace zrf
