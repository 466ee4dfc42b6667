#pragma once

#include <cstdint>

namespace psaug {

/// SplitMix64 output finalizer (a bijection on 64-bit words).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Deterministic random stream used for every stochastic choice in the
/// engine. The generator is SplitMix64 and the draw primitives are fixed
/// so the sequence can be replayed bit-exactly by other implementations:
///
///   next()      state += 0x9e3779b97f4a7c15; return mix64(state)
///   below(n)    threshold = (2^64 - n) mod n; draw x = next() until
///               x >= threshold; return x mod n
///   between(lo, hi)  lo + below(hi - lo + 1)
///   uniform01() (next() >> 11) * 2^-53
class SampleStream {
 public:
  explicit constexpr SampleStream(std::uint64_t state) noexcept : state_(state) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform integer in [0, n). Requires n > 0.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next();
      if (x >= threshold) return x % n;
    }
  }

  /// Uniform integer in [lo, hi]. Requires lo <= hi.
  constexpr std::uint64_t between(std::uint64_t lo, std::uint64_t hi) noexcept {
    if (hi - lo == ~std::uint64_t{0}) return next();
    return lo + below(hi - lo + 1);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Keyed derivation of the per-sample stream:
///
///   h = mix64(master_seed)
///   h = mix64(h ^ mix64(epoch        + 1 * 0x9e3779b97f4a7c15))
///   h = mix64(h ^ mix64(batch_index  + 2 * 0x9e3779b97f4a7c15))
///   h = mix64(h ^ mix64(sample_index + 3 * 0x9e3779b97f4a7c15))
///
/// with all arithmetic modulo 2^64; the stream starts from state h.
constexpr SampleStream derive_sample_stream(std::uint64_t master_seed, std::uint64_t epoch,
                                            std::uint64_t batch_index,
                                            std::uint64_t sample_index) noexcept {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ mix64(epoch + 1 * kGoldenGamma));
  h = mix64(h ^ mix64(batch_index + 2 * kGoldenGamma));
  h = mix64(h ^ mix64(sample_index + 3 * kGoldenGamma));
  return SampleStream(h);
}

}  // namespace psaug
