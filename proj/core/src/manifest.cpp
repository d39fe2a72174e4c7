#include "videoweave/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "videoweave/error.hpp"
#include "videoweave/hash.hpp"
#include "videoweave/io.hpp"

namespace videoweave {

using nlohmann::json;
using nlohmann::ordered_json;

std::string serialize_sample(const WovenSample& sample) {
  ordered_json obj;
  obj["sample_id"] = sample.sample_id;
  ordered_json clips = ordered_json::array();
  for (const auto& c : sample.clips) {
    ordered_json clip;
    clip["video_id"] = c.video_id;
    clip["frame_indices"] = c.frame_indices;
    clip["replacement"] = c.replacement;
    clips.push_back(std::move(clip));
  }
  obj["clips"] = std::move(clips);
  obj["caption"] = sample.caption;
  obj["prompt"] = sample.prompt;
  if (sample.cluster) {
    obj["cluster"] = *sample.cluster;
  }
  return obj.dump();
}

std::string serialize_header(const ManifestHeader& h) {
  ordered_json obj;
  obj["kind"] = "header";
  obj["format_version"] = h.format_version;
  obj["created_at"] = h.created_at;
  obj["mode"] = std::string(to_string(h.config.mode));
  obj["total_frames"] = h.config.total_frames;
  obj["videos_per_sample"] = h.config.videos_per_sample;
  obj["frames_per_video"] = h.config.frames_per_video();
  obj["samples_per_epoch"] = h.config.samples_per_epoch;
  obj["prompt"] = h.config.prompt;
  obj["seeds"] = ordered_json{{"weave", h.config.seed}, {"split", h.split_seed}};
  obj["split_size"] = h.split_size;
  obj["cluster_file_sha256"] = h.cluster_file_sha256 ? ordered_json(*h.cluster_file_sha256) : ordered_json();
  if (h.enrichment) {
    const auto& s = h.enrichment->settings;
    obj["enrichment"] = ordered_json{{"template_id", s.template_id},
                                     {"model", s.model},
                                     {"temperature", s.temperature},
                                     {"max_tokens", s.max_tokens},
                                     {"provider", h.enrichment->provider_tag}};
  } else {
    obj["enrichment"] = nullptr;
  }
  obj["sample_count"] = h.sample_count;
  obj["payload_sha256"] = h.payload_sha256;
  return obj.dump();
}

namespace {

ManifestHeader header_from_json(const json& obj) {
  if (!obj.is_object() || obj.value("kind", "") != "header") {
    throw Error("first manifest line is not a header object");
  }
  ManifestHeader h;
  h.format_version = obj.at("format_version").get<int>();
  if (h.format_version != kManifestFormatVersion) {
    throw Error("unsupported manifest format_version " + std::to_string(h.format_version));
  }
  h.created_at = obj.at("created_at").get<std::string>();
  h.config.mode = parse_weave_mode(obj.at("mode").get<std::string>());
  h.config.total_frames = obj.at("total_frames").get<std::size_t>();
  h.config.videos_per_sample = obj.at("videos_per_sample").get<std::size_t>();
  h.config.samples_per_epoch = obj.at("samples_per_epoch").get<std::size_t>();
  h.config.prompt = obj.at("prompt").get<std::string>();
  h.config.seed = obj.at("seeds").at("weave").get<Seed>();
  h.split_seed = obj.at("seeds").at("split").get<Seed>();
  h.split_size = obj.at("split_size").get<std::size_t>();
  if (const auto& c = obj.at("cluster_file_sha256"); !c.is_null()) {
    h.cluster_file_sha256 = c.get<std::string>();
  }
  if (const auto& e = obj.at("enrichment"); !e.is_null()) {
    EnrichmentInfo info;
    info.settings.template_id = e.at("template_id").get<std::string>();
    info.settings.model = e.at("model").get<std::string>();
    info.settings.temperature = e.at("temperature").get<double>();
    info.settings.max_tokens = e.at("max_tokens").get<std::size_t>();
    info.provider_tag = e.at("provider").get<std::string>();
    h.enrichment = std::move(info);
  }
  h.sample_count = obj.at("sample_count").get<std::size_t>();
  h.payload_sha256 = obj.at("payload_sha256").get<std::string>();
  if (h.config.videos_per_sample == 0 || h.config.total_frames % h.config.videos_per_sample != 0) {
    throw Error("manifest header has an inconsistent frame budget");
  }
  return h;
}

}  // namespace

void check_samples(std::span<const WovenSample> samples, const WeaveConfig& config) {
  const auto per_clip = config.frames_per_video();
  std::unordered_set<std::string_view> seen;
  for (const auto& s : samples) {
    if (s.clips.size() != config.videos_per_sample) {
      throw Error("sample " + s.sample_id + " has " + std::to_string(s.clips.size()) + " clips, expected " +
                  std::to_string(config.videos_per_sample));
    }
    if (s.frame_refs() != config.total_frames) {
      throw Error("sample " + s.sample_id + " has " + std::to_string(s.frame_refs()) +
                  " frame references, expected " + std::to_string(config.total_frames));
    }
    for (const auto& c : s.clips) {
      if (c.frame_indices.size() != per_clip) {
        throw Error("sample " + s.sample_id + " clip " + c.video_id + " has the wrong frame count");
      }
      for (std::size_t i = 1; i < c.frame_indices.size(); ++i) {
        const bool ordered = c.replacement ? c.frame_indices[i - 1] <= c.frame_indices[i]
                                           : c.frame_indices[i - 1] < c.frame_indices[i];
        if (!ordered) {
          throw Error("sample " + s.sample_id + " clip " + c.video_id + " has unordered frame indices");
        }
      }
      if (!seen.insert(c.video_id).second) {
        throw Error("video " + c.video_id + " appears twice in the epoch");
      }
    }
    if (s.caption.empty()) {
      throw Error("sample " + s.sample_id + " has an empty caption");
    }
  }
}

std::string render_manifest(std::span<const WovenSample> samples, ManifestHeader header) {
  std::string payload;
  for (const auto& s : samples) {
    payload += serialize_sample(s);
    payload += '\n';
  }
  header.sample_count = samples.size();
  header.payload_sha256 = sha256_hex(payload);
  return serialize_header(header) + "\n" + payload;
}

void emit_manifest(std::span<const WovenSample> samples, const ManifestHeader& header,
                   const std::filesystem::path& path) {
  check_samples(samples, header.config);
  write_file_atomic(path, render_manifest(samples, header));
}

ParsedManifest parse_manifest(std::string_view text) {
  ParsedManifest out;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      nl = text.size();
    }
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!have_header) {
      try {
        out.header = header_from_json(json::parse(line));
      } catch (const json::exception& e) {
        throw Error(std::string("unreadable manifest header: ") + e.what());
      }
      have_header = true;
    } else if (!line.empty()) {
      out.sample_lines.emplace_back(line);
    }
  }
  if (!have_header) {
    throw Error("manifest is empty");
  }
  return out;
}

WovenSample parse_sample(std::string_view line) {
  auto obj = json::parse(line);
  WovenSample s;
  s.sample_id = obj.at("sample_id").get<std::string>();
  for (const auto& c : obj.at("clips")) {
    Clip clip;
    clip.video_id = c.at("video_id").get<std::string>();
    clip.frame_indices = c.at("frame_indices").get<std::vector<std::uint32_t>>();
    clip.replacement = c.at("replacement").get<bool>();
    s.clips.push_back(std::move(clip));
  }
  s.caption = obj.at("caption").get<std::string>();
  s.prompt = obj.at("prompt").get<std::string>();
  if (auto it = obj.find("cluster"); it != obj.end()) {
    s.cluster = it->get<ClusterId>();
  }
  return s;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::malformed: return "malformed";
    case ViolationKind::checksum: return "checksum";
    case ViolationKind::sample_count: return "sample_count";
    case ViolationKind::clip_count: return "clip_count";
    case ViolationKind::frame_total: return "frame_total";
    case ViolationKind::frames_per_clip: return "frames_per_clip";
    case ViolationKind::index_order: return "index_order";
    case ViolationKind::index_bounds: return "index_bounds";
    case ViolationKind::unknown_video: return "unknown_video";
    case ViolationKind::duplicate_video: return "duplicate_video";
    case ViolationKind::caption_join: return "caption_join";
    case ViolationKind::prompt_mismatch: return "prompt_mismatch";
    case ViolationKind::cluster_mix: return "cluster_mix";
  }
  return "unknown";
}

std::size_t ValidationReport::count(ViolationKind kind) const noexcept {
  return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                [&](const Violation& v) { return v.kind == kind; }));
}

ValidationReport validate_manifest_text(std::string_view text, const Catalog* catalog,
                                        const ClusterFile* clusters) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string sample_id, std::string detail) {
    report.violations.push_back(Violation{kind, std::move(sample_id), std::move(detail)});
  };

  const auto parsed = parse_manifest(text);
  const auto& h = parsed.header;
  const auto& cfg = h.config;

  Sha256 payload_hash;
  for (const auto& line : parsed.sample_lines) {
    payload_hash.update(line);
    payload_hash.update("\n");
  }
  if (payload_hash.hex_digest() != h.payload_sha256) {
    add(ViolationKind::checksum, "", "payload SHA-256 does not match header");
  }
  if (parsed.sample_lines.size() != h.sample_count) {
    add(ViolationKind::sample_count, "",
        "header declares " + std::to_string(h.sample_count) + " samples, found " +
            std::to_string(parsed.sample_lines.size()));
  }

  std::unordered_map<std::string, std::size_t> cluster_index;
  if (clusters != nullptr) {
    for (std::size_t i = 0; i < clusters->video_ids.size(); ++i) {
      cluster_index.emplace(clusters->video_ids[i], i);
    }
  }

  const auto per_clip = cfg.frames_per_video();
  std::unordered_map<std::string, std::string> owner;  // video_id -> first sample_id
  for (std::size_t li = 0; li < parsed.sample_lines.size(); ++li) {
    WovenSample s;
    try {
      s = parse_sample(parsed.sample_lines[li]);
    } catch (const json::exception& e) {
      add(ViolationKind::malformed, "line " + std::to_string(li + 2), e.what());
      continue;
    }
    const auto& id = s.sample_id;

    for (const auto& c : s.clips) {
      auto [it, inserted] = owner.emplace(c.video_id, id);
      if (!inserted) {
        add(ViolationKind::duplicate_video, id,
            "video " + c.video_id + " used by " + it->second + " and " + id);
      }
    }
    if (s.prompt != cfg.prompt) {
      add(ViolationKind::prompt_mismatch, id, "prompt differs from header");
    }
    if (s.clips.size() != cfg.videos_per_sample) {
      add(ViolationKind::clip_count, id,
          std::to_string(s.clips.size()) + " clips, expected " + std::to_string(cfg.videos_per_sample));
      continue;
    }
    if (s.frame_refs() != cfg.total_frames) {
      add(ViolationKind::frame_total, id,
          std::to_string(s.frame_refs()) + " frame references, expected " + std::to_string(cfg.total_frames));
    } else if (std::any_of(s.clips.begin(), s.clips.end(),
                           [&](const Clip& c) { return c.frame_indices.size() != per_clip; })) {
      add(ViolationKind::frames_per_clip, id, "clips do not each carry " + std::to_string(per_clip) + " frames");
    }

    bool all_known = true;
    std::vector<std::string> captions;
    std::optional<ClusterId> sample_cluster;
    for (const auto& c : s.clips) {
      for (std::size_t i = 1; i < c.frame_indices.size(); ++i) {
        const bool ordered = c.replacement ? c.frame_indices[i - 1] <= c.frame_indices[i]
                                           : c.frame_indices[i - 1] < c.frame_indices[i];
        if (!ordered) {
          add(ViolationKind::index_order, id, "frame indices of " + c.video_id + " are not ascending");
          break;
        }
      }
      if (clusters != nullptr) {
        auto ci = cluster_index.find(c.video_id);
        if (ci == cluster_index.end()) {
          add(ViolationKind::cluster_mix, id, c.video_id + " is not in the cluster file");
        } else {
          const auto cl = clusters->model.assignments[ci->second];
          if (sample_cluster && *sample_cluster != cl) {
            add(ViolationKind::cluster_mix, id, "clips come from more than one cluster");
          }
          sample_cluster = cl;
        }
      }
      if (catalog == nullptr) {
        continue;
      }
      const auto* rec = catalog->find(c.video_id);
      if (rec == nullptr) {
        add(ViolationKind::unknown_video, id, c.video_id + " is not in the catalog");
        all_known = false;
        continue;
      }
      for (auto fi : c.frame_indices) {
        if (fi >= rec->frame_count) {
          add(ViolationKind::index_bounds, id,
              "frame " + std::to_string(fi) + " of " + c.video_id + " is outside [0, " +
                  std::to_string(rec->frame_count) + ")");
        }
      }
      captions.push_back(rec->caption);
    }
    if (clusters != nullptr && sample_cluster && s.cluster && *s.cluster != *sample_cluster) {
      add(ViolationKind::cluster_mix, id, "sample cluster field disagrees with the cluster file");
    }
    if (catalog != nullptr && all_known && !h.enrichment && s.caption != compose_caption(captions)) {
      add(ViolationKind::caption_join, id, "caption is not the space-joined clip captions");
    }
  }
  return report;
}

ValidationReport validate_manifest(const std::filesystem::path& path, const Catalog& catalog,
                                   const ClusterFile* clusters) {
  return validate_manifest_text(read_file(path), &catalog, clusters);
}

ManifestStats compute_stats(std::string_view text) {
  const auto report = validate_manifest_text(text, nullptr);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw Error("refusing to summarize an invalid manifest (" + std::to_string(report.violations.size()) +
                " violations, first: " + std::string(to_string(v.kind)) + " " + v.sample_id + " " + v.detail +
                ")");
  }
  const auto parsed = parse_manifest(text);
  ManifestStats st;
  std::vector<std::size_t> lengths;
  lengths.reserve(parsed.sample_lines.size());
  for (const auto& line : parsed.sample_lines) {
    const auto s = parse_sample(line);
    ++st.samples;
    st.videos += s.clips.size();
    st.total_frame_refs += s.frame_refs();
    for (const auto& c : s.clips) {
      ++st.frames_per_video[c.frame_indices.size()];
      st.replacement_clips += c.replacement ? 1 : 0;
    }
    lengths.push_back(s.caption.size());
    if (s.cluster) {
      ++st.cluster_groups[*s.cluster];
    }
  }
  if (!lengths.empty()) {
    std::sort(lengths.begin(), lengths.end());
    st.caption_min = lengths.front();
    st.caption_max = lengths.back();
    double sum = 0.0;
    for (auto l : lengths) {
      sum += static_cast<double>(l);
    }
    st.caption_mean = sum / static_cast<double>(lengths.size());
    // Nearest-rank percentiles.
    auto rank = [&](double p) {
      auto r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(lengths.size())));
      return lengths[std::clamp<std::size_t>(r, 1, lengths.size()) - 1];
    };
    st.caption_p50 = rank(0.5);
    st.caption_p90 = rank(0.9);
  }
  return st;
}

ManifestStats stats(const std::filesystem::path& path) {
  return compute_stats(read_file(path));
}

std::string stats_csv(const ManifestStats& s) {
  std::string out = "metric,key,value\n";
  auto row = [&](std::string_view metric, std::string_view key, const std::string& value) {
    out.append(metric).append(",").append(key).append(",").append(value).append("\n");
  };
  row("samples", "", std::to_string(s.samples));
  row("videos", "", std::to_string(s.videos));
  row("total_frame_refs", "", std::to_string(s.total_frame_refs));
  row("replacement_clips", "", std::to_string(s.replacement_clips));
  for (const auto& [f, n] : s.frames_per_video) {
    row("frames_per_video", std::to_string(f), std::to_string(n));
  }
  char mean[64];
  std::snprintf(mean, sizeof(mean), "%.3f", s.caption_mean);
  row("caption_length", "min", std::to_string(s.caption_min));
  row("caption_length", "mean", mean);
  row("caption_length", "p50", std::to_string(s.caption_p50));
  row("caption_length", "p90", std::to_string(s.caption_p90));
  row("caption_length", "max", std::to_string(s.caption_max));
  for (const auto& [c, n] : s.cluster_groups) {
    row("cluster_groups", std::to_string(c), std::to_string(n));
  }
  return out;
}

}  // namespace videoweave
