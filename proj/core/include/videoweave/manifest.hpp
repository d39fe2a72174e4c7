#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "videoweave/catalog.hpp"
#include "videoweave/cluster.hpp"
#include "videoweave/enrich.hpp"
#include "videoweave/weave.hpp"

namespace videoweave {

inline constexpr int kManifestFormatVersion = 1;

struct EnrichmentInfo {
  EnrichmentSettings settings;
  std::string provider_tag;

  friend bool operator==(const EnrichmentInfo& a, const EnrichmentInfo& b) {
    return a.settings.template_id == b.settings.template_id && a.settings.model == b.settings.model &&
           a.settings.temperature == b.settings.temperature &&
           a.settings.max_tokens == b.settings.max_tokens && a.provider_tag == b.provider_tag;
  }
};

/// First line of a manifest. Carries enough provenance to rerun the
/// pipeline that produced it.
struct ManifestHeader {
  int format_version = kManifestFormatVersion;
  WeaveConfig config;
  Seed split_seed = 0;
  std::size_t split_size = 0;
  std::optional<std::string> cluster_file_sha256;
  std::optional<EnrichmentInfo> enrichment;
  std::string created_at;
  // Filled in by render/emit.
  std::size_t sample_count = 0;
  std::string payload_sha256;
};

/// One sample as a single JSON line (no trailing newline), keys in fixed order.
std::string serialize_sample(const WovenSample& sample);
std::string serialize_header(const ManifestHeader& header);

/// Checks the sample invariants that do not need the catalog: clip count,
/// per-clip and total frame counts, index order, no repeated video.
/// Throws Error describing the first violation.
void check_samples(std::span<const WovenSample> samples, const WeaveConfig& config);

/// Header line followed by one line per sample. Fills sample_count and the
/// SHA-256 of the concatenated sample lines (each including its '\n').
std::string render_manifest(std::span<const WovenSample> samples, ManifestHeader header);

/// check_samples, then an atomic write of render_manifest.
void emit_manifest(std::span<const WovenSample> samples, const ManifestHeader& header,
                   const std::filesystem::path& path);

struct ParsedManifest {
  ManifestHeader header;
  std::vector<std::string> sample_lines;
};

/// Splits the header from the sample lines. Throws Error if the header is
/// missing or unparseable.
ParsedManifest parse_manifest(std::string_view text);
WovenSample parse_sample(std::string_view line);

enum class ViolationKind {
  malformed,
  checksum,
  sample_count,
  clip_count,
  frame_total,
  frames_per_clip,
  index_order,
  index_bounds,
  unknown_video,
  duplicate_video,
  caption_join,
  prompt_mismatch,
  cluster_mix,
};
std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string sample_id;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::size_t count(ViolationKind kind) const noexcept;
};

/// Collects every violation. Without a catalog, index bounds, unknown ids
/// and caption joins are not checked. With a cluster file, clips of a
/// sample must all come from one cluster.
ValidationReport validate_manifest_text(std::string_view text, const Catalog* catalog,
                                        const ClusterFile* clusters = nullptr);
ValidationReport validate_manifest(const std::filesystem::path& path, const Catalog& catalog,
                                   const ClusterFile* clusters = nullptr);

struct ManifestStats {
  std::size_t samples = 0;
  std::size_t videos = 0;
  std::size_t total_frame_refs = 0;
  std::size_t replacement_clips = 0;
  std::map<std::size_t, std::size_t> frames_per_video;  // f -> clip count
  std::size_t caption_min = 0;
  std::size_t caption_max = 0;
  double caption_mean = 0.0;
  std::size_t caption_p50 = 0;
  std::size_t caption_p90 = 0;
  std::map<ClusterId, std::size_t> cluster_groups;  // clustered mode only
};

/// Refuses (throws Error) when catalog-independent validation fails.
ManifestStats compute_stats(std::string_view text);
ManifestStats stats(const std::filesystem::path& path);

/// Rows of metric,key,value.
std::string stats_csv(const ManifestStats& s);

}  // namespace videoweave
