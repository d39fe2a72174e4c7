#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "videoweave/catalog.hpp"
#include "videoweave/cluster.hpp"
#include "videoweave/rng.hpp"

namespace videoweave {

inline constexpr std::size_t kDefaultTotalFrames = 16;
inline constexpr std::size_t kDefaultSamplesPerEpoch = 10000;
inline constexpr std::string_view kDefaultPrompt = "Describe what is happening in the video.";
inline constexpr std::size_t kStudiedVideosPerSample[] = {1, 2, 4, 8, 16};

enum class WeaveMode { random, clustered };
std::string_view to_string(WeaveMode mode) noexcept;
WeaveMode parse_weave_mode(std::string_view text);

struct WeaveConfig {
  std::size_t total_frames = kDefaultTotalFrames;  // T
  std::size_t videos_per_sample = 1;               // L
  WeaveMode mode = WeaveMode::random;
  std::size_t samples_per_epoch = kDefaultSamplesPerEpoch;
  Seed seed = 0;
  std::string prompt = std::string(kDefaultPrompt);

  /// T / L.
  std::size_t frames_per_video() const noexcept {
    return videos_per_sample == 0 ? 0 : total_frames / videos_per_sample;
  }

  /// Throws unless L >= 1, T % L == 0, samples >= 1 and
  /// samples * L <= split_size.
  void validate(std::size_t split_size) const;
};

/// Videos spliced into one sample, in clip order.
struct Group {
  std::vector<std::string> video_ids;
  std::optional<ClusterId> cluster;

  friend bool operator==(const Group&, const Group&) = default;
};

struct Clip {
  std::string video_id;
  std::vector<std::uint32_t> frame_indices;
  bool replacement = false;

  friend bool operator==(const Clip&, const Clip&) = default;
};

struct WovenSample {
  std::string sample_id;
  std::vector<Clip> clips;
  std::string caption;
  std::string prompt;
  std::optional<ClusterId> cluster;

  std::size_t frame_refs() const noexcept;

  friend bool operator==(const WovenSample&, const WovenSample&) = default;
};

/// Seeded shuffle of `ids`, then the first L*count ids cut into consecutive
/// groups of L. No id is used twice.
std::vector<Group> plan_random_groups(std::span<const std::string> ids, std::size_t videos_per_sample,
                                      std::size_t count, Seed seed);

/// One group per cluster. Group order and member order are seeded shuffles.
/// `video_ids` maps point index to id. Throws if the model capacity != L.
std::vector<Group> plan_clustered_groups(const ClusterModel& model,
                                         std::span<const std::string> video_ids,
                                         std::size_t videos_per_sample, Seed seed);
std::vector<Group> plan_clustered_groups(const ClusterFile& file, std::size_t videos_per_sample,
                                         Seed seed);

struct FrameSelection {
  std::vector<std::uint32_t> indices;  // ascending
  bool replacement = false;
};

/// f indices uniform without replacement from [0, frame_count), sorted.
/// When frame_count < f the draw is with replacement and flagged.
FrameSelection sample_frame_indices(std::uint32_t frame_count, std::size_t frames, Seed stream_seed);

/// Joins with a single space, order preserved. Throws on an empty caption.
std::string compose_caption(std::span<const std::string> captions);

/// Materializes the first samples_per_epoch groups. Every group must have
/// exactly L ids drawn from `split` and the catalog, with no repeats across
/// groups. Frame draws use per-(sample, clip) derived streams, so the result
/// does not depend on `threads`.
std::vector<WovenSample> build_epoch(const Catalog& catalog, std::span<const std::string> split,
                                     std::span<const Group> groups, const WeaveConfig& config,
                                     std::size_t threads = 1);

std::string make_sample_id(std::size_t index);

}  // namespace videoweave
