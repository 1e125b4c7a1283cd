#pragma once

#include <cstdint>
#include <initializer_list>

namespace qecfab {

// SplitMix64 finalizer. Used as the mixing function of the counter-based
// generator below.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives a stream key from a seed and any number of stream coordinates,
// e.g. stream_key(seed, {shot, sector}).
constexpr std::uint64_t stream_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t k = mix64(seed);
  for (std::uint64_t c : coords) {
    k = mix64(k ^ mix64(c + 0x632BE59BD9B4E019ULL));
  }
  return k;
}

/// Counter-based 64-bit generator (SplitMix64 in counter mode).
///
/// Output i of a stream is mix64(key + i * golden), so any element of any
/// stream can be computed without touching other streams. Streams are
/// addressed by stream_key(seed, {...}) which keeps Monte-Carlo campaigns
/// reproducible regardless of how shots are split across workers.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}
  constexpr CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept
      : key_(stream_key(seed, coords)) {}

  constexpr std::uint64_t next() noexcept {
    return mix64(key_ + 0x9E3779B97F4A7C15ULL * (counter_++));
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  constexpr bool bernoulli(double p) noexcept {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

  // Uniform integer in the closed range [lo, hi]. Uses rejection to stay
  // unbiased.
  constexpr std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return lo + static_cast<std::int64_t>(x % span);
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qecfab
