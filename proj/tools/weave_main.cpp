// weave: build synthetic long-context video-text manifests from a clip catalog.
//
//   weave synth     generate a synthetic catalog and embedding file
//   weave split     build the nested superset splits
//   weave cluster   balanced K-means over pooled clip embeddings
//   weave emit      build one epoch and write the manifest
//   weave validate  check a manifest against its catalog
//   weave stats     summarize a manifest as CSV

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "videoweave/catalog.hpp"
#include "videoweave/cluster.hpp"
#include "videoweave/embeddings.hpp"
#include "videoweave/enrich.hpp"
#include "videoweave/error.hpp"
#include "videoweave/hash.hpp"
#include "videoweave/manifest.hpp"
#include "videoweave/pipeline.hpp"
#include "videoweave/synthetic.hpp"
#include "videoweave/weave.hpp"

namespace vw = videoweave;

namespace {

// Manifests must be byte-reproducible, so the timestamp never comes from the
// wall clock: explicit flag, then SOURCE_DATE_EPOCH, then the Unix epoch.
std::string resolve_created_at(const std::string& flag) {
  if (!flag.empty()) {
    return flag;
  }
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde != nullptr && *sde != '\0') {
    return std::string("@") + sde;
  }
  return "1970-01-01T00:00:00Z";
}

struct SynthArgs {
  std::size_t count = 1000;
  std::uint32_t dim = 768;
  std::size_t rows = 16;
  std::size_t centers = 32;
  std::uint32_t min_frames = 24;
  std::uint32_t max_frames = 600;
  double noise = 0.1;
  vw::Seed seed = 0;
  std::string catalog_out;
  std::string embeddings_out;
};

struct SplitArgs {
  std::string catalog;
  std::vector<std::size_t> sizes{std::begin(vw::kDefaultSplitSizes), std::end(vw::kDefaultSplitSizes)};
  vw::Seed seed = 0;
  std::string out;
};

struct ClusterArgs {
  std::string split;
  std::size_t split_size = 0;
  std::string embeddings;
  std::size_t capacity = 0;
  std::size_t clusters = 0;
  vw::Seed seed = 0;
  std::size_t max_iters = 100;
  std::string init = "farthest_first";
  bool no_normalize = false;
  bool drop_remainder = false;
  std::string out;
};

struct EmitArgs {
  std::string catalog;
  std::string split;
  std::size_t split_size = 0;
  std::string mode = "random";
  std::size_t videos_per_sample = 1;
  std::size_t total_frames = vw::kDefaultTotalFrames;
  std::size_t samples = vw::kDefaultSamplesPerEpoch;
  vw::Seed seed = 0;
  std::string prompt{vw::kDefaultPrompt};
  std::string cluster;
  bool enrich = false;
  bool enrich_dry_run = false;
  std::string cache_dir = ".weave-cache";
  std::size_t concurrency = 4;
  std::size_t threads = 1;
  std::string created_at;
  std::string out;
};

struct ValidateArgs {
  std::string manifest;
  std::string catalog;
  std::string cluster;
};

int run_synth(const SynthArgs& a) {
  vw::SyntheticCatalogOptions co;
  co.count = a.count;
  co.min_frames = a.min_frames;
  co.max_frames = a.max_frames;
  co.seed = a.seed;
  const auto catalog = vw::make_synthetic_catalog(co);
  vw::write_catalog(catalog, a.catalog_out);
  std::cerr << "wrote " << catalog.size() << " records to " << a.catalog_out << "\n";

  if (!a.embeddings_out.empty()) {
    std::vector<std::string> ids;
    ids.reserve(catalog.size());
    for (const auto& r : catalog.records()) {
      ids.push_back(r.video_id);
    }
    vw::SyntheticEmbeddingOptions eo;
    eo.dim = a.dim;
    eo.rows = a.rows;
    eo.latent_centers = a.centers;
    eo.noise = a.noise;
    eo.seed = a.seed;
    vw::export_embeddings(vw::make_synthetic_embeddings(ids, eo), a.embeddings_out);
    std::cerr << "wrote " << ids.size() << " embedding records (dim " << a.dim << ", " << a.rows
              << " rows) to " << a.embeddings_out << "\n";
  }
  return 0;
}

int run_split(const SplitArgs& a) {
  const auto catalog = vw::ingest_catalog(a.catalog);
  const auto chain = vw::build_split_chain(catalog, a.sizes, a.seed);
  vw::save_split_chain(chain, a.out);
  std::cerr << "wrote split chain over " << chain.permutation.size() << " ids to " << a.out << "\n";
  return 0;
}

int run_cluster(const ClusterArgs& a) {
  const auto chain = vw::load_split_chain(a.split);
  const auto ids = chain.split(a.split_size);
  const auto embeddings = vw::import_embeddings(a.embeddings);

  vw::ClusterPoolOptions o;
  o.capacity = a.capacity;
  if (a.clusters > 0) {
    o.clusters = a.clusters;
  }
  o.seed = a.seed;
  o.max_iters = a.max_iters;
  o.init = vw::parse_init_method(a.init);
  o.normalize = !a.no_normalize;
  o.drop_remainder = a.drop_remainder;
  const auto file = vw::cluster_pool(ids, embeddings, o, [](std::size_t pass, auto, double inertia) {
    std::cerr << "pass " << pass << " inertia " << inertia << "\n";
  });
  vw::save_cluster_file(file, a.out);
  std::cerr << "K=" << file.config.clusters << " d=" << file.config.capacity
            << " stop=" << vw::to_string(file.model.stop) << " updates=" << file.model.iterations_run
            << " inertia=" << file.model.inertia << " dropped=" << file.dropped_ids.size() << "\n";
  return 0;
}

int run_emit(const EmitArgs& a) {
  const auto catalog = vw::ingest_catalog(a.catalog);
  const auto chain = vw::load_split_chain(a.split);

  vw::WeaveConfig cfg;
  cfg.total_frames = a.total_frames;
  cfg.videos_per_sample = a.videos_per_sample;
  cfg.mode = vw::parse_weave_mode(a.mode);
  cfg.samples_per_epoch = a.samples;
  cfg.seed = a.seed;
  cfg.prompt = a.prompt;

  vw::ManifestHeader header;
  header.config = cfg;
  header.split_seed = chain.master_seed;
  header.split_size = a.split_size;
  header.created_at = resolve_created_at(a.created_at);

  std::optional<vw::ClusterFile> clusters;
  if (cfg.mode == vw::WeaveMode::clustered) {
    if (a.cluster.empty()) {
      throw vw::Error("--mode clustered requires --cluster");
    }
    clusters = vw::load_cluster_file(a.cluster);
    header.cluster_file_sha256 = vw::sha256_file(a.cluster);
  }

  auto samples = vw::weave_epoch(catalog, chain, a.split_size, cfg, clusters ? &*clusters : nullptr, a.threads);

  if (a.enrich || a.enrich_dry_run) {
    vw::EnrichmentInfo info;
    std::unique_ptr<vw::HttpChatClient> client;
    if (a.enrich_dry_run) {
      info.provider_tag = std::string(vw::kDryRunProvider);
    } else {
      auto opts = vw::HttpChatClient::options_from_env();
      info.settings = opts.settings;
      client = std::make_unique<vw::HttpChatClient>(opts);
      info.provider_tag = client->provider_tag();
    }
    vw::EnrichmentCache cache(a.cache_dir);
    samples = vw::enrich_epoch(catalog, samples, client.get(), &cache, {}, a.concurrency);
    header.enrichment = info;
  }

  vw::emit_manifest(samples, header, a.out);
  std::cerr << "wrote " << samples.size() << " samples (" << samples.size() * cfg.total_frames
            << " frame references) to " << a.out << "\n";
  return 0;
}

int run_validate(const ValidateArgs& a) {
  const auto catalog = vw::ingest_catalog(a.catalog);
  std::optional<vw::ClusterFile> clusters;
  if (!a.cluster.empty()) {
    clusters = vw::load_cluster_file(a.cluster);
  }
  const auto report = vw::validate_manifest(a.manifest, catalog, clusters ? &*clusters : nullptr);
  for (const auto& v : report.violations) {
    std::cout << vw::to_string(v.kind) << "\t" << (v.sample_id.empty() ? "-" : v.sample_id) << "\t"
              << v.detail << "\n";
  }
  std::cerr << (report.ok() ? "OK" : "FAILED") << ": " << report.violations.size() << " violation(s)\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weave short captioned clips into long-context training manifests"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic catalog and embedding file");
  s->add_option("--count", synth.count, "Number of clips")->capture_default_str();
  s->add_option("--dim", synth.dim, "Embedding dimension")->capture_default_str();
  s->add_option("--rows", synth.rows, "Frame rows per clip")->capture_default_str();
  s->add_option("--centers", synth.centers, "Latent visual centers")->capture_default_str();
  s->add_option("--min-frames", synth.min_frames)->capture_default_str();
  s->add_option("--max-frames", synth.max_frames)->capture_default_str();
  s->add_option("--noise", synth.noise)->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--catalog-out", synth.catalog_out)->required();
  s->add_option("--embeddings-out", synth.embeddings_out);

  SplitArgs split;
  auto* sp = app.add_subcommand("split", "Build nested superset splits");
  sp->add_option("--catalog", split.catalog)->required()->check(CLI::ExistingFile);
  sp->add_option("--sizes", split.sizes, "Strictly increasing split sizes")->delimiter(',')->capture_default_str();
  sp->add_option("--seed", split.seed)->capture_default_str();
  sp->add_option("--out", split.out)->required();

  ClusterArgs cluster;
  auto* c = app.add_subcommand("cluster", "Balanced K-means over pooled embeddings");
  c->add_option("--split", cluster.split)->required()->check(CLI::ExistingFile);
  c->add_option("--split-size", cluster.split_size)->required();
  c->add_option("--embeddings", cluster.embeddings)->required()->check(CLI::ExistingFile);
  c->add_option("--videos-per-sample,--capacity", cluster.capacity, "Members per cluster (d = L)")->required();
  c->add_option("--clusters", cluster.clusters, "K (default: pool size / d)");
  c->add_option("--seed", cluster.seed)->capture_default_str();
  c->add_option("--max-iters", cluster.max_iters)->capture_default_str();
  c->add_option("--init", cluster.init, "Centroid init: farthest_first or uniform")
      ->check(CLI::IsMember({"farthest_first", "farthest-first", "uniform"}))
      ->capture_default_str();
  c->add_flag("--no-normalize", cluster.no_normalize, "Cluster raw pooled vectors");
  c->add_flag("--drop-remainder", cluster.drop_remainder, "Drop n mod d outliers instead of failing");
  c->add_option("--out", cluster.out)->required();

  EmitArgs emit;
  auto* e = app.add_subcommand("emit", "Build one epoch and write its manifest");
  e->add_option("--catalog", emit.catalog)->required()->check(CLI::ExistingFile);
  e->add_option("--split", emit.split)->required()->check(CLI::ExistingFile);
  e->add_option("--split-size", emit.split_size)->required();
  e->add_option("--mode", emit.mode)->check(CLI::IsMember({"random", "clustered"}))->capture_default_str();
  e->add_option("--videos-per-sample", emit.videos_per_sample)->capture_default_str();
  e->add_option("--total-frames", emit.total_frames)->capture_default_str();
  e->add_option("--samples", emit.samples)->capture_default_str();
  e->add_option("--seed", emit.seed)->capture_default_str();
  e->add_option("--prompt", emit.prompt)->capture_default_str();
  e->add_option("--cluster", emit.cluster, "Cluster file (clustered mode)");
  e->add_flag("--enrich", emit.enrich, "Rewrite captions through the chat endpoint");
  e->add_flag("--enrich-dry-run", emit.enrich_dry_run, "Exercise the enrichment path without a service");
  e->add_option("--cache-dir", emit.cache_dir)->capture_default_str();
  e->add_option("--concurrency", emit.concurrency, "In-flight enrichment requests")->capture_default_str();
  e->add_option("--threads", emit.threads, "Sample construction threads")->capture_default_str();
  e->add_option("--created-at", emit.created_at, "Header timestamp");
  e->add_option("--out", emit.out)->required();

  ValidateArgs validate;
  auto* v = app.add_subcommand("validate", "Check a manifest against its catalog");
  v->add_option("--manifest", validate.manifest)->required()->check(CLI::ExistingFile);
  v->add_option("--catalog", validate.catalog)->required()->check(CLI::ExistingFile);
  v->add_option("--cluster", validate.cluster, "Also check single-cluster samples");

  std::string stats_manifest;
  auto* st = app.add_subcommand("stats", "Summarize a manifest as CSV");
  st->add_option("--manifest", stats_manifest)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return run_synth(synth);
    if (*sp) return run_split(split);
    if (*c) return run_cluster(cluster);
    if (*e) return run_emit(emit);
    if (*v) return run_validate(validate);
    if (*st) {
      std::cout << vw::stats_csv(vw::stats(stats_manifest));
      return 0;
    }
  } catch (const vw::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
