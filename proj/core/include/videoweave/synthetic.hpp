#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "videoweave/catalog.hpp"
#include "videoweave/embeddings.hpp"
#include "videoweave/rng.hpp"

namespace videoweave {

// Generators for reproducible stand-in data when no real corpus is at hand.

struct SyntheticCatalogOptions {
  std::size_t count = 1000;
  std::uint32_t min_frames = 24;
  std::uint32_t max_frames = 600;
  double fps = 24.0;
  Seed seed = 0;
};

/// Ids are "vid0000000", "vid0000001", ...; captions are short template
/// sentences.
Catalog make_synthetic_catalog(const SyntheticCatalogOptions& options);

struct SyntheticEmbeddingOptions {
  std::uint32_t dim = 768;
  std::size_t rows = 16;
  std::size_t latent_centers = 32;
  double center_scale = 1.0;
  double noise = 0.1;
  Seed seed = 0;
};

/// Each clip draws a latent center; its frames are the center plus
/// Gaussian noise.
EmbeddingSet make_synthetic_embeddings(std::span<const std::string> ids,
                                       const SyntheticEmbeddingOptions& options);

/// Standard normal via Box-Muller on Rng::uniform01.
double standard_normal(Rng& rng);

}  // namespace videoweave
