#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "videoweave/catalog.hpp"
#include "videoweave/cluster.hpp"
#include "videoweave/embeddings.hpp"
#include "videoweave/rng.hpp"
#include "videoweave/synthetic.hpp"
#include "videoweave/weave.hpp"

namespace vw = videoweave;

namespace {

vw::PointMatrix uniform_points(std::size_t n, std::size_t dim, vw::Seed seed) {
  vw::Rng rng(seed);
  vw::PointMatrix m(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : m.row(i)) {
      v = rng.uniform01();
    }
  }
  return m;
}

void BM_AssignCapacity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 4;
  const auto points = uniform_points(n, 64, 1);
  const auto centroids = vw::init_centroids(points, n / d, 2);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vw::assign_capacity(points, centroids, d, order));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_AssignCapacity)->Arg(256)->Arg(1024)->Arg(4096);

void BM_FitBalancedKMeans(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto points = uniform_points(n, 32, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vw::fit_balanced_kmeans(points, {.clusters = n / 4, .capacity = 4, .seed = 4}));
  }
}
BENCHMARK(BM_FitBalancedKMeans)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_BuildEpoch(benchmark::State& state) {
  const auto L = static_cast<std::size_t>(state.range(0));
  const auto catalog = vw::make_synthetic_catalog({.count = 20000, .seed = 5});
  std::vector<std::string> ids;
  for (const auto& r : catalog.records()) {
    ids.push_back(r.video_id);
  }
  const vw::WeaveConfig cfg{.videos_per_sample = L, .samples_per_epoch = 1000, .seed = 6};
  const auto groups = vw::plan_random_groups(ids, L, cfg.samples_per_epoch, cfg.seed);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vw::build_epoch(catalog, ids, groups, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_BuildEpoch)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MeanPool(benchmark::State& state) {
  const std::vector<std::string> ids = {"clip"};
  const auto set = vw::make_synthetic_embeddings(ids, {.dim = 768, .rows = 16, .seed = 7});
  const auto& matrix = set.matrices()[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(vw::mean_pool(matrix));
  }
}
BENCHMARK(BM_MeanPool);

void BM_SampleFrameIndices(benchmark::State& state) {
  const auto f = static_cast<std::size_t>(state.range(0));
  std::uint64_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vw::sample_frame_indices(600, f, vw::derive_seed(8, "frames", {t++, 0})));
  }
}
BENCHMARK(BM_SampleFrameIndices)->Arg(1)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
