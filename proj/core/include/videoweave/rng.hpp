#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace videoweave {

using Seed = std::uint64_t;

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent sub-stream seed from a master seed, a purpose tag
/// and an optional index path, e.g. derive_seed(seed, "frames", {sample, clip}).
Seed derive_seed(Seed master, std::string_view tag,
                 std::initializer_list<std::uint64_t> indices = {}) noexcept;

/// Counter-based generator: the n-th output is mix64(seed + n * golden).
/// Satisfies UniformRandomBitGenerator. All helpers below avoid the
/// implementation-defined std distributions so output is bit-reproducible.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(Seed seed) noexcept : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  Seed seed_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates shuffle driven by Rng::uniform.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

/// Returns a seeded permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace videoweave
