#include "videoweave/rng.hpp"

#include <numeric>

namespace videoweave {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Seed derive_seed(Seed master, std::string_view tag,
                 std::initializer_list<std::uint64_t> indices) noexcept {
  std::uint64_t tag_hash = kFnvOffset;
  for (unsigned char c : tag) {
    tag_hash = (tag_hash ^ c) * kFnvPrime;
  }
  std::uint64_t h = mix64(master + kGolden);
  h = mix64(h ^ tag_hash);
  for (std::uint64_t idx : indices) {
    h = mix64(h ^ (idx + kGolden));
  }
  return h;
}

Rng::result_type Rng::operator()() noexcept {
  ++counter_;
  return mix64(seed_ + counter_ * kGolden);
}

std::uint64_t Rng::uniform(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection; unbiased.
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform01() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(out), rng);
  return out;
}

}  // namespace videoweave
