#include "videoweave/pipeline.hpp"

#include <unordered_set>

#include "videoweave/error.hpp"

namespace videoweave {

ClusterFile cluster_pool(std::span<const std::string> ids, const EmbeddingSet& embeddings,
                         const ClusterPoolOptions& options, const IterationObserver& observer) {
  if (options.capacity == 0) {
    throw Error("cluster capacity d must be >= 1");
  }
  std::vector<PooledEmbedding> pooled;
  pooled.reserve(ids.size());
  for (const auto& id : ids) {
    const auto* m = embeddings.find(id);
    if (m == nullptr) {
      throw Error("no embedding for video_id " + id);
    }
    auto p = mean_pool(*m);
    pooled.push_back(options.normalize ? l2_normalize(p) : std::move(p));
  }
  PointMatrix points = PointMatrix::from_pooled(pooled);

  ClusterFile file;
  file.normalized = options.normalize;
  if (points.rows() % options.capacity != 0) {
    if (!options.drop_remainder) {
      throw Error(std::to_string(points.rows()) + " points are not divisible by capacity " +
                  std::to_string(options.capacity) + " (use --drop-remainder)");
    }
    const auto split = drop_remainder(points, options.capacity);
    for (auto i : split.dropped) {
      file.dropped_ids.push_back(ids[i]);
    }
    for (auto i : split.kept) {
      file.video_ids.push_back(ids[i]);
    }
    points = points.select(split.kept);
  } else {
    file.video_ids.assign(ids.begin(), ids.end());
  }

  file.config.capacity = options.capacity;
  file.config.clusters = options.clusters.value_or(points.rows() / options.capacity);
  file.config.seed = options.seed;
  file.config.max_iters = options.max_iters;
  file.config.init = options.init;
  file.model = fit_balanced_kmeans(points, file.config, observer);
  return file;
}

std::vector<WovenSample> weave_epoch(const Catalog& catalog, const SplitChain& chain,
                                     std::size_t split_size, const WeaveConfig& config,
                                     const ClusterFile* clusters, std::size_t threads) {
  const auto split = chain.split(split_size);
  config.validate(split.size());
  std::vector<Group> groups;
  if (config.mode == WeaveMode::random) {
    groups = plan_random_groups(split, config.videos_per_sample, config.samples_per_epoch, config.seed);
  } else {
    if (clusters == nullptr) {
      throw Error("clustered mode requires a cluster file");
    }
    std::unordered_set<std::string_view> in_split(split.begin(), split.end());
    for (const auto& id : clusters->video_ids) {
      if (!in_split.contains(id)) {
        throw Error("cluster file id " + id + " is not in split " + std::to_string(split_size));
      }
    }
    groups = plan_clustered_groups(*clusters, config.videos_per_sample, config.seed);
  }
  return build_epoch(catalog, split, groups, config, threads);
}

}  // namespace videoweave
