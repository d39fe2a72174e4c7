#include "videoweave/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "videoweave/error.hpp"

namespace videoweave {

namespace {

constexpr std::array<std::string_view, 12> kSubjects = {
    "a dog", "a young woman", "an old man", "two children", "a cat", "a cyclist",
    "a chef", "a flock of birds", "a red car", "a surfer", "a horse", "a street musician"};
constexpr std::array<std::string_view, 10> kActions = {
    "runs", "walks slowly", "jumps", "sits quietly", "dances", "looks around",
    "turns left", "plays", "rests", "waves"};
constexpr std::array<std::string_view, 10> kPlaces = {
    "on a sunny beach", "in a busy market", "near a lake", "in the snow", "on a city street",
    "in a kitchen", "at sunset", "in a forest", "on a mountain trail", "in a park"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& words, Rng& rng) {
  return words[rng.uniform(N)];
}

}  // namespace

double standard_normal(Rng& rng) {
  double u1 = rng.uniform01();
  while (u1 <= 0.0) {
    u1 = rng.uniform01();
  }
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Catalog make_synthetic_catalog(const SyntheticCatalogOptions& o) {
  if (o.min_frames == 0 || o.max_frames < o.min_frames) {
    throw Error("synthetic catalog needs 1 <= min_frames <= max_frames");
  }
  std::vector<VideoRecord> records;
  records.reserve(o.count);
  for (std::size_t i = 0; i < o.count; ++i) {
    Rng rng(derive_seed(o.seed, "synthetic-catalog", {i}));
    VideoRecord r;
    char id[32];
    std::snprintf(id, sizeof(id), "vid%07zu", i);
    r.video_id = id;
    r.source_uri = "synthetic://clips/" + r.video_id + ".mp4";
    r.caption = std::string(pick(kSubjects, rng)) + " " + std::string(pick(kActions, rng)) + " " +
                std::string(pick(kPlaces, rng));
    r.frame_count = o.min_frames + static_cast<std::uint32_t>(rng.uniform(o.max_frames - o.min_frames + 1));
    r.duration_s = static_cast<double>(r.frame_count) / o.fps;
    records.push_back(std::move(r));
  }
  return Catalog(std::move(records));
}

EmbeddingSet make_synthetic_embeddings(std::span<const std::string> ids,
                                       const SyntheticEmbeddingOptions& o) {
  if (o.dim == 0 || o.rows == 0 || o.latent_centers == 0) {
    throw Error("synthetic embeddings need dim, rows and latent_centers >= 1");
  }
  std::vector<std::vector<double>> centers(o.latent_centers, std::vector<double>(o.dim));
  for (std::size_t c = 0; c < o.latent_centers; ++c) {
    Rng rng(derive_seed(o.seed, "synthetic-centers", {c}));
    for (auto& v : centers[c]) {
      v = o.center_scale * standard_normal(rng);
    }
  }

  EmbeddingSet set(o.dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Rng rng(derive_seed(o.seed, "synthetic-embedding", {i}));
    const auto& center = centers[rng.uniform(o.latent_centers)];
    FrameEmbeddingMatrix m;
    m.video_id = ids[i];
    m.dim = o.dim;
    m.values.resize(o.rows * o.dim);
    for (std::size_t r = 0; r < o.rows; ++r) {
      for (std::size_t j = 0; j < o.dim; ++j) {
        m.values[r * o.dim + j] = static_cast<float>(center[j] + o.noise * standard_normal(rng));
      }
    }
    set.add(std::move(m));
  }
  return set;
}

}  // namespace videoweave
