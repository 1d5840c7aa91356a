#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace cspd {

/// SplitMix64 finalizer. Used to derive substream keys and to seed Rng.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Oracle query slots within one iteration. Each slot owns an independent
/// substream, so the dual-step and primal-step samples never share draws.
enum class QuerySlot : std::uint64_t {
  kHValue = 1,
  kGValue = 2,
  kGradX = 3,
  kHJacobian = 4,
  kGradY = 5,
  kGJacobian = 6,
};

/// xoshiro256** generator keyed by a 64-bit counter tuple.
///
/// Substreams are addressed by (master seed, run, iteration, slot); the key is
/// a hash chain over the tuple, so any stream can be reconstructed without
/// replaying the ones before it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key) noexcept {
    std::uint64_t s = key;
    for (auto& w : state_) {
      s = splitmix64(s);
      w = s;
    }
  }

  static Rng stream(std::uint64_t master, std::uint64_t run, std::uint64_t iteration,
                    std::uint64_t slot) noexcept {
    std::uint64_t k = splitmix64(master ^ 0x5851f42d4c957f2dULL);
    k = splitmix64(k ^ run);
    k = splitmix64(k ^ iteration);
    k = splitmix64(k ^ slot);
    return Rng(k);
  }

  static Rng stream(std::uint64_t master, std::uint64_t run, std::uint64_t iteration,
                    QuerySlot slot) noexcept {
    return stream(master, run, iteration, static_cast<std::uint64_t>(slot));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(*this); }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cspd
