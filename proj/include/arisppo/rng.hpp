#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace arisppo {

/// Named substreams. Each consumer draws from its own stream so that changing
/// how many numbers one consumer pulls never shifts another consumer's draws.
enum class Stream : std::uint64_t {
  channel = 1,
  policy = 2,
  init = 3,
  phases = 4,
  minibatch = 5,
  evaluation = 6,
};

namespace detail {

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: output n is a keyed hash of the counter n.
///
/// The state is just (key, counter), so copies are cheap snapshots and two
/// generators with equal state always produce equal sequences. All
/// floating-point transforms are written out here rather than taken from
/// <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept
      : key_(detail::splitmix_finalize(seed ^ 0x6A09E667F3BCC909ULL)), seed_(seed) {}

  Rng(std::uint64_t seed, Stream stream) noexcept : Rng(seed) {
    key_ = derive_key(key_, static_cast<std::uint64_t>(stream));
  }

  /// Independent child generator; the parent is left untouched.
  [[nodiscard]] Rng substream(std::uint64_t id) const noexcept {
    Rng child = *this;
    child.key_ = derive_key(key_, id);
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t x = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    return detail::splitmix_finalize(x ^ (key_ >> 17));
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a logarithm argument.
  double uniform_open_low() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). Uses rejection to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % n;
  }

  /// Standard normal via Box-Muller (one output per two uniforms).
  double normal() noexcept {
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  static std::uint64_t derive_key(std::uint64_t key, std::uint64_t id) noexcept {
    return detail::splitmix_finalize(key ^ detail::splitmix_finalize(id + 0x3C6EF372FE94F82BULL));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t seed_;
};

}  // namespace arisppo
