// Counter-keyed deterministic random streams.
//
// Every Monte-Carlo draw site derives its own stream from a small set of
// integers (seed, sweep, population, sample, ...), so results are bit-identical
// for a fixed seed regardless of how the work is partitioned across workers.
#pragma once

#include <cmath>
#include <cstdint>

namespace cafde {

// splitmix64 finalizer (Vigna); also used as the per-step output function.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Order-sensitive key combiner: key_mix(a, b) != key_mix(b, a).
inline constexpr std::uint64_t key_mix(std::uint64_t key, std::uint64_t field) {
  return mix64(key + 0x9e3779b97f4a7c15ULL * (field + 1));
}

inline constexpr std::uint64_t key_mix(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
  return key_mix(key_mix(key, a), b);
}

// Key derivation for a real-valued parameter (e.g. a sigma probe).
inline std::uint64_t key_mix_real(std::uint64_t key, double value) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(value));
  __builtin_memcpy(&bits, &value, sizeof(bits));
  return key_mix(key, bits);
}

// splitmix64 stream. Cheap to construct, one per draw site.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : state_(key) {}

  std::uint64_t u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1]
  double uniform_pos() { return static_cast<double>((u64() >> 11) + 1) * 0x1.0p-53; }

  // standard normal (Box-Muller, one value per call)
  double gaussian() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 6.283185307179586476925286766559 * uniform();
    return r * std::cos(t);
  }

  // uniform integer in [0, n) via 64x64 multiply-shift
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(u64()) * n) >> 64);
  }

  int bit() { return static_cast<int>(u64() >> 63); }

 private:
  std::uint64_t state_;
};

}  // namespace cafde
