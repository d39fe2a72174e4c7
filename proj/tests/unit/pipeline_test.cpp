#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"
#include "videoweave/error.hpp"
#include "videoweave/hash.hpp"
#include "videoweave/manifest.hpp"
#include "videoweave/pipeline.hpp"
#include "videoweave/synthetic.hpp"

namespace videoweave {
namespace {

struct Corpus {
  Catalog catalog;
  SplitChain chain;
  EmbeddingSet embeddings{32};
};

Corpus make_corpus(std::size_t count, Seed seed) {
  Corpus c;
  c.catalog = make_synthetic_catalog({.count = count, .seed = seed});
  c.chain = build_split_chain(c.catalog, {count / 2, count}, seed + 1);
  const auto ids = testing::ids_of(c.catalog);
  c.embeddings = make_synthetic_embeddings(
      ids, {.dim = 32, .rows = 4, .latent_centers = 8, .noise = 0.05, .seed = seed + 2});
  return c;
}

TEST(ClusterPool, BalancedOverSplit) {
  const auto c = make_corpus(240, 3);
  const auto split = c.chain.split(240);
  const auto file = cluster_pool(split, c.embeddings, {.capacity = 4, .seed = 9});
  EXPECT_EQ(file.config.clusters, 60u);
  EXPECT_TRUE(file.normalized);
  ASSERT_EQ(file.video_ids.size(), 240u);
  std::vector<std::size_t> occ(60, 0);
  for (auto a : file.model.assignments) {
    ++occ.at(a);
  }
  for (auto n : occ) {
    EXPECT_EQ(n, 4u);
  }
}

TEST(ClusterPool, NormalizedCentroidInputs) {
  const auto c = make_corpus(40, 4);
  const auto split = c.chain.split(40);
  const auto normalized = cluster_pool(split, c.embeddings, {.capacity = 2, .seed = 1});
  const auto raw = cluster_pool(split, c.embeddings, {.capacity = 2, .seed = 1, .normalize = false});
  EXPECT_FALSE(raw.normalized);
  // Means of unit vectors have norm <= 1.
  for (std::size_t k = 0; k < normalized.model.centroids.rows(); ++k) {
    double sq = 0.0;
    for (double v : normalized.model.centroids.row(k)) {
      sq += v * v;
    }
    EXPECT_LE(sq, 1.0 + 1e-9);
  }
}

TEST(ClusterPool, RemainderRequiresOptIn) {
  const auto c = make_corpus(40, 5);
  const auto ids = testing::ids_of(c.catalog);
  const std::span<const std::string> pool(ids.data(), 39);
  EXPECT_THROW(cluster_pool(pool, c.embeddings, {.capacity = 4}), Error);
  const auto file = cluster_pool(pool, c.embeddings, {.capacity = 4, .drop_remainder = true});
  EXPECT_EQ(file.video_ids.size(), 36u);
  EXPECT_EQ(file.dropped_ids.size(), 3u);
  std::set<std::string> all(file.video_ids.begin(), file.video_ids.end());
  for (const auto& d : file.dropped_ids) {
    EXPECT_TRUE(all.insert(d).second);
  }
  EXPECT_EQ(all.size(), 39u);
}

TEST(ClusterPool, MissingEmbeddingIsAnError) {
  const auto c = make_corpus(20, 6);
  std::vector<std::string> ids = testing::ids_of(c.catalog);
  ids.back() = "absent";
  EXPECT_THROW(cluster_pool(ids, c.embeddings, {.capacity = 2}), Error);
}

TEST(WeaveEpoch, RandomModeUsesSplitOnly) {
  const auto c = make_corpus(200, 7);
  WeaveConfig cfg{.videos_per_sample = 4, .samples_per_epoch = 25, .seed = 2};
  const auto samples = weave_epoch(c.catalog, c.chain, 100, cfg);
  ASSERT_EQ(samples.size(), 25u);
  const auto split = c.chain.split(100);
  const std::set<std::string> allowed(split.begin(), split.end());
  std::set<std::string> seen;
  for (const auto& s : samples) {
    EXPECT_FALSE(s.cluster.has_value());
    for (const auto& clip : s.clips) {
      EXPECT_TRUE(allowed.count(clip.video_id)) << clip.video_id;
      EXPECT_TRUE(seen.insert(clip.video_id).second);
    }
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(WeaveEpoch, ClusteredSamplesStayInOneCluster) {
  const auto c = make_corpus(160, 8);
  const auto file = cluster_pool(c.chain.split(160), c.embeddings, {.capacity = 4, .seed = 3});
  WeaveConfig cfg{.videos_per_sample = 4, .mode = WeaveMode::clustered, .samples_per_epoch = 30, .seed = 4};
  const auto samples = weave_epoch(c.catalog, c.chain, 160, cfg, &file);
  ASSERT_EQ(samples.size(), 30u);
  std::set<ClusterId> used;
  for (const auto& s : samples) {
    ASSERT_TRUE(s.cluster.has_value());
    EXPECT_TRUE(used.insert(*s.cluster).second);
    for (const auto& clip : s.clips) {
      EXPECT_EQ(file.cluster_of(clip.video_id), *s.cluster);
    }
  }
}

TEST(WeaveEpoch, ClusteredNeedsMatchingCapacity) {
  const auto c = make_corpus(80, 9);
  const auto file = cluster_pool(c.chain.split(80), c.embeddings, {.capacity = 2});
  WeaveConfig cfg{.videos_per_sample = 4, .mode = WeaveMode::clustered, .samples_per_epoch = 5};
  EXPECT_THROW(weave_epoch(c.catalog, c.chain, 80, cfg, &file), Error);
  EXPECT_THROW(weave_epoch(c.catalog, c.chain, 80, cfg, nullptr), Error);
}

TEST(FullPipeline, ManifestIsByteIdentical) {
  auto run = [] {
    const auto c = make_corpus(120, 10);
    const auto file = cluster_pool(c.chain.split(120), c.embeddings, {.capacity = 2, .seed = 5});
    ManifestHeader header;
    header.config = {.videos_per_sample = 2, .mode = WeaveMode::clustered, .samples_per_epoch = 40, .seed = 6};
    header.split_seed = c.chain.master_seed;
    header.split_size = 120;
    header.cluster_file_sha256 = sha256_hex(serialize_cluster_file(file));
    header.created_at = "1970-01-01T00:00:00Z";
    const auto samples = weave_epoch(c.catalog, c.chain, 120, header.config, &file, 3);
    return std::pair{render_manifest(samples, header), serialize_cluster_file(file)};
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

}  // namespace
}  // namespace videoweave
