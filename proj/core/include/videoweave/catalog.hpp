#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "videoweave/rng.hpp"

namespace videoweave {

/// One captioned clip.
struct VideoRecord {
  std::string video_id;
  std::string source_uri;
  std::string caption;
  std::uint32_t frame_count = 0;
  std::optional<double> duration_s;

  friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

/// Immutable, validated collection of clips in file order.
///
/// Construction enforces: unique video_id, caption non-empty after trimming
/// whitespace, frame_count >= 1, duration_s (when present) finite and >= 0.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<VideoRecord> records);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::span<const VideoRecord> records() const noexcept { return records_; }

  bool contains(std::string_view id) const;
  /// Returns nullptr when the id is unknown.
  const VideoRecord* find(std::string_view id) const;
  /// Throws Error when the id is unknown.
  const VideoRecord& at(std::string_view id) const;

 private:
  std::vector<VideoRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Parses JSONL: one object per line with video_id, source_uri, caption,
/// frame_count and optional duration_s. Blank lines are skipped.
Catalog parse_catalog(std::istream& in);
Catalog ingest_catalog(const std::filesystem::path& path);
void write_catalog(const Catalog& catalog, const std::filesystem::path& path);

inline constexpr std::size_t kDefaultSplitSizes[] = {10000, 20000, 40000, 80000, 160000};

/// Nested dataset splits: split(s) is the first s ids of one seeded
/// permutation, so every split strictly contains every smaller one.
struct SplitChain {
  Seed master_seed = 0;
  std::vector<std::string> permutation;
  std::vector<std::size_t> sizes;

  /// The split of the given size. Throws Error unless size is in `sizes`.
  std::span<const std::string> split(std::size_t size) const;

  friend bool operator==(const SplitChain&, const SplitChain&) = default;
};

/// Seeded permutation of the catalog ids (in catalog order before
/// shuffling). sizes must be non-empty, strictly increasing, positive and
/// bounded by the catalog size.
SplitChain build_split_chain(const Catalog& catalog, std::vector<std::size_t> sizes, Seed seed);

std::string serialize_split_chain(const SplitChain& chain);
SplitChain parse_split_chain(std::string_view json_text);
void save_split_chain(const SplitChain& chain, const std::filesystem::path& path);
SplitChain load_split_chain(const std::filesystem::path& path);

}  // namespace videoweave
