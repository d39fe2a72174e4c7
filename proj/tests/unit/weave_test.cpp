#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include <boost/math/distributions/chi_squared.hpp>

#include "test_support.hpp"
#include "videoweave/error.hpp"
#include "videoweave/weave.hpp"

namespace videoweave {
namespace {

std::vector<std::string> letters(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(std::string(1, static_cast<char>('a' + i)));
  }
  return ids;
}

Catalog small_catalog(std::size_t n, std::uint32_t frames = 50) {
  std::vector<VideoRecord> recs;
  for (const auto& id : letters(n)) {
    recs.push_back({id, "u://" + id, "caption " + id, frames, std::nullopt});
  }
  return Catalog(std::move(recs));
}

TEST(WeaveConfig, FrameBudgetRules) {
  WeaveConfig c;
  for (std::size_t l : kStudiedVideosPerSample) {
    c.videos_per_sample = l;
    c.samples_per_epoch = 10;
    EXPECT_NO_THROW(c.validate(10 * l));
    EXPECT_EQ(c.frames_per_video() * l, 16u);
  }
  c.videos_per_sample = 3;
  EXPECT_THROW(c.validate(1000), Error);
  c.videos_per_sample = 32;
  EXPECT_THROW(c.validate(1000), Error);  // f would be 0
  c.videos_per_sample = 2;
  c.samples_per_epoch = 6;
  EXPECT_THROW(c.validate(11), Error);
  EXPECT_EQ(c.prompt, "Describe what is happening in the video.");
}

TEST(PlanRandomGroups, ExactPartitionOfSix) {
  const auto ids = letters(6);
  const auto groups = plan_random_groups(ids, 2, 3, 1);
  ASSERT_EQ(groups.size(), 3u);
  std::set<std::string> used;
  for (const auto& g : groups) {
    EXPECT_EQ(g.video_ids.size(), 2u);
    EXPECT_FALSE(g.cluster.has_value());
    used.insert(g.video_ids.begin(), g.video_ids.end());
  }
  EXPECT_EQ(used, std::set<std::string>(ids.begin(), ids.end()));
}

TEST(PlanRandomGroups, SingletonLayout) {
  const auto ids = letters(5);
  const auto groups = plan_random_groups(ids, 1, 5, 3);
  ASSERT_EQ(groups.size(), 5u);
  for (const auto& g : groups) {
    EXPECT_EQ(g.video_ids.size(), 1u);
  }
}

TEST(PlanRandomGroups, EveryIdOnceAtPaperScale) {
  const auto catalog = make_synthetic_catalog({.count = 160000, .seed = 1});
  const auto ids = testing::ids_of(catalog);
  const auto groups = plan_random_groups(ids, 16, 10000, 5);
  std::unordered_set<std::string_view> used;
  for (const auto& g : groups) {
    for (const auto& id : g.video_ids) {
      EXPECT_TRUE(used.insert(id).second);
    }
  }
  EXPECT_EQ(used.size(), 160000u);
}

TEST(PlanRandomGroups, InsufficientIds) {
  EXPECT_THROW(plan_random_groups(letters(5), 2, 3, 0), Error);
}

TEST(PlanRandomGroups, Deterministic) {
  const auto ids = letters(20);
  EXPECT_EQ(plan_random_groups(ids, 4, 5, 9), plan_random_groups(ids, 4, 5, 9));
  EXPECT_NE(plan_random_groups(ids, 4, 5, 9), plan_random_groups(ids, 4, 5, 10));
}

ClusterModel toy_model() {
  ClusterModel m;
  m.capacity = 2;
  m.centroids = PointMatrix::from_rows({{0.0}, {1.0}, {2.0}});
  m.assignments = {2, 0, 1, 0, 2, 1};
  return m;
}

TEST(PlanClusteredGroups, OneGroupPerCluster) {
  const auto ids = letters(6);
  const auto m = toy_model();
  const auto groups = plan_clustered_groups(m, ids, 2, 4);
  ASSERT_EQ(groups.size(), 3u);
  std::set<ClusterId> seen;
  for (const auto& g : groups) {
    ASSERT_TRUE(g.cluster.has_value());
    EXPECT_EQ(g.video_ids.size(), 2u);
    seen.insert(*g.cluster);
    for (const auto& id : g.video_ids) {
      const auto idx = static_cast<std::size_t>(id[0] - 'a');
      EXPECT_EQ(m.assignments[idx], *g.cluster);
    }
  }
  EXPECT_EQ(seen.size(), 3u);
}

TEST(PlanClusteredGroups, DeterministicAndSeedSensitive) {
  const auto ids = letters(6);
  EXPECT_EQ(plan_clustered_groups(toy_model(), ids, 2, 4), plan_clustered_groups(toy_model(), ids, 2, 4));
  bool any_diff = false;
  for (Seed s = 0; s < 10 && !any_diff; ++s) {
    any_diff = plan_clustered_groups(toy_model(), ids, 2, s) != plan_clustered_groups(toy_model(), ids, 2, 4);
  }
  EXPECT_TRUE(any_diff);
}

TEST(PlanClusteredGroups, CapacityMustEqualL) {
  EXPECT_THROW(plan_clustered_groups(toy_model(), letters(6), 3, 0), Error);
}

TEST(SampleFrames, ForcedFullSelection) {
  const auto s = sample_frame_indices(8, 8, 123);
  EXPECT_EQ(s.indices, (std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_FALSE(s.replacement);
}

TEST(SampleFrames, DistinctSortedInRange) {
  for (Seed seed = 0; seed < 200; ++seed) {
    const auto s = sample_frame_indices(100, 4, seed);
    ASSERT_EQ(s.indices.size(), 4u);
    EXPECT_TRUE(std::is_sorted(s.indices.begin(), s.indices.end()));
    EXPECT_EQ(std::adjacent_find(s.indices.begin(), s.indices.end()), s.indices.end());
    EXPECT_LT(s.indices.back(), 100u);
    EXPECT_FALSE(s.replacement);
  }
}

TEST(SampleFrames, ShortClipFallsBackToReplacement) {
  const auto s = sample_frame_indices(3, 8, 5);
  ASSERT_EQ(s.indices.size(), 8u);
  EXPECT_TRUE(s.replacement);
  EXPECT_TRUE(std::is_sorted(s.indices.begin(), s.indices.end()));
  EXPECT_LT(s.indices.back(), 3u);
}

TEST(SampleFrames, SingleFrameUniformWithinFourSigma) {
  constexpr std::size_t kDraws = 10000;
  constexpr std::uint32_t kFrames = 10;
  std::vector<std::size_t> counts(kFrames, 0);
  for (std::size_t i = 0; i < kDraws; ++i) {
    ++counts[sample_frame_indices(kFrames, 1, derive_seed(77, "frames", {i, 0})).indices[0]];
  }
  const double p = 1.0 / kFrames;
  const double mean = kDraws * p;
  const double sd = std::sqrt(kDraws * p * (1 - p));
  double chi2 = 0;
  for (auto c : counts) {
    EXPECT_LE(std::fabs(static_cast<double>(c) - mean), 4 * sd);
    chi2 += (c - mean) * (c - mean) / mean;
  }
  const boost::math::chi_squared dist(kFrames - 1);
  EXPECT_LT(chi2, boost::math::quantile(dist, 1 - 0.001));
}

TEST(SampleFrames, MultiFrameMarginalsUniform) {
  // Each index is included with probability f / frame_count.
  constexpr std::size_t kDraws = 20000;
  constexpr std::uint32_t kFrames = 12;
  std::vector<std::size_t> counts(kFrames, 0);
  for (std::size_t i = 0; i < kDraws; ++i) {
    for (auto idx : sample_frame_indices(kFrames, 4, derive_seed(3, "frames", {i, 1})).indices) {
      ++counts[idx];
    }
  }
  const double expected = kDraws * 4.0 / kFrames;
  double chi2 = 0;
  for (auto c : counts) {
    chi2 += (c - expected) * (c - expected) / expected;
  }
  EXPECT_LT(chi2, boost::math::quantile(boost::math::chi_squared(kFrames - 1), 1 - 0.001));
}

TEST(ComposeCaption, SingleIsIdentity) {
  const std::vector<std::string> c = {"dog runs"};
  EXPECT_EQ(compose_caption(c), "dog runs");
}

TEST(ComposeCaption, JoinsWithOneSpace) {
  const std::vector<std::string> c = {"dog runs", "cat sleeps"};
  EXPECT_EQ(compose_caption(c), "dog runs cat sleeps");
}

TEST(ComposeCaption, LengthIdentity) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> caps(1 + rng.uniform(16));
    std::size_t total = 0;
    for (auto& c : caps) {
      c.assign(1 + rng.uniform(40), static_cast<char>('a' + rng.uniform(26)));
      total += c.size();
    }
    EXPECT_EQ(compose_caption(caps).size(), total + caps.size() - 1);
  }
}

TEST(ComposeCaption, EmptyCaptionRejected) {
  const std::vector<std::string> c = {"a", ""};
  EXPECT_THROW(compose_caption(c), Error);
}

TEST(BuildEpoch, FrameBudgetForEveryStudiedL) {
  const auto catalog = make_synthetic_catalog({.count = 1600, .seed = 9});
  const auto ids = testing::ids_of(catalog);
  for (std::size_t l : kStudiedVideosPerSample) {
    WeaveConfig cfg{.videos_per_sample = l, .samples_per_epoch = 100, .seed = 2};
    const auto groups = plan_random_groups(ids, l, 100, 2);
    const auto samples = build_epoch(catalog, ids, groups, cfg);
    ASSERT_EQ(samples.size(), 100u);
    std::size_t refs = 0;
    std::unordered_set<std::string_view> videos;
    for (const auto& s : samples) {
      EXPECT_EQ(s.clips.size(), l);
      EXPECT_EQ(s.frame_refs(), 16u);
      for (const auto& c : s.clips) {
        EXPECT_EQ(c.frame_indices.size(), 16 / l);
        EXPECT_TRUE(videos.insert(c.video_id).second);
      }
      refs += s.frame_refs();
    }
    EXPECT_EQ(refs, 1600u);
    EXPECT_EQ(videos.size(), 100 * l);
  }
}

TEST(BuildEpoch, SingleVideoDegeneratesToPlainFinetuning) {
  const auto catalog = small_catalog(4);
  const auto ids = letters(4);
  WeaveConfig cfg{.videos_per_sample = 1, .samples_per_epoch = 4};
  const auto samples = build_epoch(catalog, ids, plan_random_groups(ids, 1, 4, 0), cfg);
  for (const auto& s : samples) {
    EXPECT_EQ(s.caption, catalog.at(s.clips[0].video_id).caption);
    EXPECT_EQ(s.clips[0].frame_indices.size(), 16u);
    EXPECT_EQ(s.prompt, "Describe what is happening in the video.");
  }
}

TEST(BuildEpoch, CaptionIsJoinInClipOrder) {
  const auto catalog = small_catalog(8);
  const auto ids = letters(8);
  WeaveConfig cfg{.videos_per_sample = 4, .samples_per_epoch = 2};
  for (const auto& s : build_epoch(catalog, ids, plan_random_groups(ids, 4, 2, 1), cfg)) {
    std::string expect;
    for (const auto& c : s.clips) {
      expect += (expect.empty() ? "" : " ") + catalog.at(c.video_id).caption;
    }
    EXPECT_EQ(s.caption, expect);
  }
}

TEST(BuildEpoch, IndependentOfThreadCount) {
  const auto catalog = make_synthetic_catalog({.count = 4000, .seed = 2});
  const auto ids = testing::ids_of(catalog);
  WeaveConfig cfg{.videos_per_sample = 4, .samples_per_epoch = 1000, .seed = 8};
  const auto groups = plan_random_groups(ids, 4, 1000, 8);
  EXPECT_EQ(build_epoch(catalog, ids, groups, cfg, 1), build_epoch(catalog, ids, groups, cfg, 7));
}

TEST(BuildEpoch, RejectsMismatchedGroups) {
  const auto catalog = small_catalog(6);
  const auto ids = letters(6);
  WeaveConfig cfg{.videos_per_sample = 2, .samples_per_epoch = 3};
  auto groups = plan_random_groups(ids, 2, 3, 0);

  auto short_plan = groups;
  short_plan.pop_back();
  EXPECT_THROW(build_epoch(catalog, ids, short_plan, cfg), Error);

  auto wrong_size = groups;
  wrong_size[0].video_ids.pop_back();
  EXPECT_THROW(build_epoch(catalog, ids, wrong_size, cfg), Error);

  auto repeated = groups;
  repeated[1].video_ids[0] = repeated[0].video_ids[0];
  EXPECT_THROW(build_epoch(catalog, ids, repeated, cfg), Error);

  auto outside = groups;
  outside[2].video_ids[0] = "zz";
  EXPECT_THROW(build_epoch(catalog, ids, outside, cfg), Error);

  cfg.mode = WeaveMode::clustered;
  EXPECT_THROW(build_epoch(catalog, ids, groups, cfg), Error);
}

TEST(BuildEpoch, ShortClipsFlaggedNotDropped) {
  const auto catalog = small_catalog(4, 3);
  const auto ids = letters(4);
  WeaveConfig cfg{.videos_per_sample = 2, .samples_per_epoch = 2};
  const auto samples = build_epoch(catalog, ids, plan_random_groups(ids, 2, 2, 0), cfg);
  for (const auto& s : samples) {
    EXPECT_EQ(s.frame_refs(), 16u);
    for (const auto& c : s.clips) {
      EXPECT_TRUE(c.replacement);
    }
  }
}

}  // namespace
}  // namespace videoweave
