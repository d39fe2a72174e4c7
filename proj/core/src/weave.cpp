#include "videoweave/weave.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "videoweave/error.hpp"

namespace videoweave {

std::string_view to_string(WeaveMode mode) noexcept {
  return mode == WeaveMode::clustered ? "clustered" : "random";
}

WeaveMode parse_weave_mode(std::string_view text) {
  if (text == "random") {
    return WeaveMode::random;
  }
  if (text == "clustered") {
    return WeaveMode::clustered;
  }
  throw Error("unknown weave mode: " + std::string(text));
}

void WeaveConfig::validate(std::size_t split_size) const {
  if (videos_per_sample == 0) {
    throw Error("videos_per_sample must be >= 1");
  }
  if (total_frames == 0 || total_frames % videos_per_sample != 0) {
    throw Error("total_frames (" + std::to_string(total_frames) +
                ") must be a positive multiple of videos_per_sample (" +
                std::to_string(videos_per_sample) + ")");
  }
  if (samples_per_epoch == 0) {
    throw Error("samples_per_epoch must be >= 1");
  }
  if (samples_per_epoch * videos_per_sample > split_size) {
    throw Error("epoch needs " + std::to_string(samples_per_epoch * videos_per_sample) +
                " videos but the split has " + std::to_string(split_size));
  }
}

std::size_t WovenSample::frame_refs() const noexcept {
  std::size_t total = 0;
  for (const auto& c : clips) {
    total += c.frame_indices.size();
  }
  return total;
}

std::vector<Group> plan_random_groups(std::span<const std::string> ids, std::size_t videos_per_sample,
                                      std::size_t count, Seed seed) {
  if (videos_per_sample == 0) {
    throw Error("videos_per_sample must be >= 1");
  }
  if (ids.size() < videos_per_sample * count) {
    throw Error("random grouping needs " + std::to_string(videos_per_sample * count) +
                " ids but only " + std::to_string(ids.size()) + " are available");
  }
  std::vector<std::string> pool(ids.begin(), ids.end());
  Rng rng(derive_seed(seed, "random-groups"));
  shuffle(std::span<std::string>(pool), rng);

  std::vector<Group> groups(count);
  for (std::size_t g = 0; g < count; ++g) {
    auto first = pool.begin() + static_cast<std::ptrdiff_t>(g * videos_per_sample);
    groups[g].video_ids.assign(std::make_move_iterator(first),
                               std::make_move_iterator(first + static_cast<std::ptrdiff_t>(videos_per_sample)));
  }
  return groups;
}

std::vector<Group> plan_clustered_groups(const ClusterModel& model,
                                         std::span<const std::string> video_ids,
                                         std::size_t videos_per_sample, Seed seed) {
  if (model.capacity != videos_per_sample) {
    throw Error("cluster capacity d=" + std::to_string(model.capacity) +
                " does not match videos_per_sample L=" + std::to_string(videos_per_sample));
  }
  if (video_ids.size() != model.assignments.size()) {
    throw Error("cluster model and id list disagree on point count");
  }
  const auto k = model.centroids.rows();
  std::vector<Group> by_cluster(k);
  for (std::size_t i = 0; i < video_ids.size(); ++i) {
    const auto c = model.assignments[i];
    if (c >= k) {
      throw Error("cluster id out of range");
    }
    by_cluster[c].video_ids.push_back(video_ids[i]);
    by_cluster[c].cluster = c;
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng group_rng(derive_seed(seed, "cluster-group-order"));
  shuffle(std::span<std::size_t>(order), group_rng);

  std::vector<Group> groups;
  groups.reserve(k);
  for (std::size_t c : order) {
    auto& g = by_cluster[c];
    if (g.video_ids.size() != videos_per_sample) {
      throw Error("cluster " + std::to_string(c) + " has " + std::to_string(g.video_ids.size()) +
                  " members, expected " + std::to_string(videos_per_sample));
    }
    Rng member_rng(derive_seed(seed, "cluster-members", {c}));
    shuffle(std::span<std::string>(g.video_ids), member_rng);
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<Group> plan_clustered_groups(const ClusterFile& file, std::size_t videos_per_sample,
                                         Seed seed) {
  return plan_clustered_groups(file.model, file.video_ids, videos_per_sample, seed);
}

FrameSelection sample_frame_indices(std::uint32_t frame_count, std::size_t frames, Seed stream_seed) {
  if (frame_count == 0 || frames == 0) {
    throw Error("frame sampling needs frame_count >= 1 and f >= 1");
  }
  Rng rng(stream_seed);
  FrameSelection out;
  out.indices.reserve(frames);
  if (frame_count < frames) {
    out.replacement = true;
    for (std::size_t i = 0; i < frames; ++i) {
      out.indices.push_back(static_cast<std::uint32_t>(rng.uniform(frame_count)));
    }
  } else {
    // Floyd's subset sampling: uniform f-subset in O(f) draws.
    for (std::uint64_t j = frame_count - frames; j < frame_count; ++j) {
      const auto t = static_cast<std::uint32_t>(rng.uniform(j + 1));
      const bool present = std::find(out.indices.begin(), out.indices.end(), t) != out.indices.end();
      out.indices.push_back(present ? static_cast<std::uint32_t>(j) : t);
    }
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

std::string compose_caption(std::span<const std::string> captions) {
  std::string out;
  std::size_t total = captions.empty() ? 0 : captions.size() - 1;
  for (const auto& c : captions) {
    total += c.size();
  }
  out.reserve(total);
  for (std::size_t i = 0; i < captions.size(); ++i) {
    if (captions[i].empty()) {
      throw Error("cannot compose an empty caption");
    }
    if (i > 0) {
      out.push_back(' ');
    }
    out += captions[i];
  }
  return out;
}

std::string make_sample_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%07zu", index);
  return buf;
}

std::vector<WovenSample> build_epoch(const Catalog& catalog, std::span<const std::string> split,
                                     std::span<const Group> groups, const WeaveConfig& config,
                                     std::size_t threads) {
  config.validate(split.size());
  const auto count = config.samples_per_epoch;
  const auto per_clip = config.frames_per_video();
  if (groups.size() < count) {
    throw Error("planner produced " + std::to_string(groups.size()) + " groups but the epoch needs " +
                std::to_string(count));
  }

  std::unordered_set<std::string_view> in_split(split.begin(), split.end());
  std::unordered_set<std::string_view> used;
  used.reserve(count * config.videos_per_sample);
  for (std::size_t s = 0; s < count; ++s) {
    const auto& g = groups[s];
    if (g.video_ids.size() != config.videos_per_sample) {
      throw Error("group " + std::to_string(s) + " has " + std::to_string(g.video_ids.size()) +
                  " videos, config expects L=" + std::to_string(config.videos_per_sample));
    }
    if (config.mode == WeaveMode::clustered && !g.cluster) {
      throw Error("clustered weave received a group without a cluster id");
    }
    for (const auto& id : g.video_ids) {
      if (!in_split.contains(id)) {
        throw Error("video_id " + id + " is not in the selected split");
      }
      if (!catalog.contains(id)) {
        throw Error("video_id " + id + " is not in the catalog");
      }
      if (!used.insert(id).second) {
        throw Error("video_id " + id + " appears in more than one group");
      }
    }
  }

  std::vector<WovenSample> samples(count);
  auto build_range = [&](std::size_t begin, std::size_t end) {
    std::vector<std::string> captions;
    for (std::size_t s = begin; s < end; ++s) {
      const auto& g = groups[s];
      auto& out = samples[s];
      out.sample_id = make_sample_id(s);
      out.prompt = config.prompt;
      out.cluster = config.mode == WeaveMode::clustered ? g.cluster : std::nullopt;
      out.clips.reserve(g.video_ids.size());
      captions.clear();
      for (std::size_t c = 0; c < g.video_ids.size(); ++c) {
        const auto& rec = catalog.at(g.video_ids[c]);
        auto sel = sample_frame_indices(rec.frame_count, per_clip,
                                        derive_seed(config.seed, "frames", {s, c}));
        out.clips.push_back(Clip{rec.video_id, std::move(sel.indices), sel.replacement});
        captions.push_back(rec.caption);
      }
      out.caption = compose_caption(captions);
    }
  };

  threads = std::clamp<std::size_t>(threads, 1, count);
  if (threads == 1) {
    build_range(0, count);
  } else {
    std::vector<std::jthread> workers;
    const auto chunk = (count + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const auto begin = t * chunk;
      const auto end = std::min(count, begin + chunk);
      if (begin < end) {
        workers.emplace_back(build_range, begin, end);
      }
    }
  }
  return samples;
}

}  // namespace videoweave
