#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "videoweave/catalog.hpp"
#include "videoweave/cluster.hpp"
#include "videoweave/embeddings.hpp"
#include "videoweave/weave.hpp"

namespace videoweave {

struct ClusterPoolOptions {
  std::size_t capacity = 1;               // d, normally the weave's L
  std::optional<std::size_t> clusters;    // K, defaults to n / d
  Seed seed = 0;
  std::size_t max_iters = 100;
  InitMethod init = InitMethod::farthest_first;
  bool normalize = true;
  bool drop_remainder = false;
};

/// Pools (and by default L2-normalizes) the embedding of every id, then fits
/// balanced K-means. With n mod d != 0 this throws unless drop_remainder is
/// set, in which case the farthest points from the global mean are left out
/// and listed in dropped_ids.
ClusterFile cluster_pool(std::span<const std::string> ids, const EmbeddingSet& embeddings,
                         const ClusterPoolOptions& options, const IterationObserver& observer = {});

/// Plans groups for the configured mode and builds the epoch over
/// split(split_size).
std::vector<WovenSample> weave_epoch(const Catalog& catalog, const SplitChain& chain,
                                     std::size_t split_size, const WeaveConfig& config,
                                     const ClusterFile* clusters = nullptr, std::size_t threads = 1);

}  // namespace videoweave
