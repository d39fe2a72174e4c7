#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "videoweave/rng.hpp"

namespace videoweave {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a(), b());
  }
}

TEST(Rng, DerivedStreamsDifferByTagAndIndex) {
  std::set<Seed> seeds = {derive_seed(1, "frames", {0, 0}), derive_seed(1, "frames", {0, 1}),
                          derive_seed(1, "frames", {1, 0}), derive_seed(1, "split"),
                          derive_seed(2, "split"), derive_seed(1, "frames")};
  EXPECT_EQ(seeds.size(), 6u);
  EXPECT_EQ(derive_seed(9, "order", {3}), derive_seed(9, "order", {3}));
}

TEST(Rng, UniformStaysInBound) {
  Rng rng(7);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 10ULL, 1000003ULL, (1ULL << 63) + 5}) {
    for (int i = 0; i < 1000; ++i) {
      EXPECT_LT(rng.uniform(bound), bound);
    }
  }
}

TEST(Rng, Uniform01InUnitInterval) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(11);
  auto idx = shuffled_indices(500, rng);
  auto sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> expect(500);
  std::iota(expect.begin(), expect.end(), std::size_t{0});
  EXPECT_EQ(sorted, expect);
  EXPECT_NE(idx, expect);
}

}  // namespace
}  // namespace videoweave
