#include "videoweave/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "videoweave/error.hpp"
#include "videoweave/io.hpp"

namespace videoweave {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

void check_record(const VideoRecord& r) {
  if (r.video_id.empty()) {
    throw Error("empty video_id");
  }
  if (blank(r.caption)) {
    throw Error("empty caption for video_id: " + r.video_id);
  }
  if (r.frame_count == 0) {
    throw Error("zero frame_count for video_id: " + r.video_id);
  }
  if (r.duration_s && (!std::isfinite(*r.duration_s) || *r.duration_s < 0.0)) {
    throw Error("invalid duration_s for video_id: " + r.video_id);
  }
}

std::string require_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

VideoRecord record_from_json(const json& obj) {
  if (!obj.is_object()) {
    throw Error("record is not a JSON object");
  }
  VideoRecord r;
  r.video_id = require_string(obj, "video_id");
  r.source_uri = require_string(obj, "source_uri");
  r.caption = require_string(obj, "caption");

  auto fc = obj.find("frame_count");
  if (fc == obj.end() || !fc->is_number_integer()) {
    throw Error("missing or non-integer field 'frame_count'");
  }
  if (fc->is_number_unsigned()) {
    auto v = fc->get<std::uint64_t>();
    if (v > UINT32_MAX) {
      throw Error("frame_count out of range for video_id: " + r.video_id);
    }
    r.frame_count = static_cast<std::uint32_t>(v);
  } else if (fc->get<std::int64_t>() <= 0) {
    throw Error("non-positive frame_count for video_id: " + r.video_id);
  }
  if (auto d = obj.find("duration_s"); d != obj.end() && !d->is_null()) {
    if (!d->is_number()) {
      throw Error("non-numeric duration_s for video_id: " + r.video_id);
    }
    r.duration_s = d->get<double>();
  }
  return r;
}

}  // namespace

Catalog::Catalog(std::vector<VideoRecord> records) : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    check_record(records_[i]);
    if (!index_.emplace(records_[i].video_id, i).second) {
      throw Error("duplicate video_id: " + records_[i].video_id);
    }
  }
}

bool Catalog::contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

const VideoRecord* Catalog::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

const VideoRecord& Catalog::at(std::string_view id) const {
  if (const auto* r = find(id)) {
    return *r;
  }
  throw Error("unknown video_id: " + std::string(id));
}

Catalog parse_catalog(std::istream& in) {
  std::vector<VideoRecord> records;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) {
      continue;
    }
    try {
      auto rec = record_from_json(json::parse(line));
      check_record(rec);
      if (!seen.emplace(rec.video_id, line_no).second) {
        throw Error("duplicate video_id: " + rec.video_id);
      }
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw Error("catalog line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("catalog line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Catalog(std::move(records));
}

Catalog ingest_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open catalog " + path.string());
  }
  return parse_catalog(in);
}

void write_catalog(const Catalog& catalog, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : catalog.records()) {
    ordered_json obj;
    obj["video_id"] = r.video_id;
    obj["source_uri"] = r.source_uri;
    obj["caption"] = r.caption;
    obj["frame_count"] = r.frame_count;
    if (r.duration_s) {
      obj["duration_s"] = *r.duration_s;
    }
    out += obj.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::span<const std::string> SplitChain::split(std::size_t size) const {
  if (std::find(sizes.begin(), sizes.end(), size) == sizes.end()) {
    throw Error("split size " + std::to_string(size) + " is not part of the chain");
  }
  if (size > permutation.size()) {
    throw Error("split size " + std::to_string(size) + " exceeds permutation length");
  }
  return std::span<const std::string>(permutation).first(size);
}

SplitChain build_split_chain(const Catalog& catalog, std::vector<std::size_t> sizes, Seed seed) {
  if (sizes.empty()) {
    throw Error("split sizes must not be empty");
  }
  if (sizes.front() == 0) {
    throw Error("split sizes must be positive");
  }
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) {
      throw Error("split sizes must be strictly increasing");
    }
  }
  if (sizes.back() > catalog.size()) {
    throw Error("largest split requires " + std::to_string(sizes.back()) +
                " videos but the catalog has " + std::to_string(catalog.size()));
  }

  SplitChain chain;
  chain.master_seed = seed;
  chain.sizes = std::move(sizes);
  chain.permutation.reserve(catalog.size());
  for (const auto& r : catalog.records()) {
    chain.permutation.push_back(r.video_id);
  }
  Rng rng(derive_seed(seed, "split"));
  shuffle(std::span<std::string>(chain.permutation), rng);
  return chain;
}

std::string serialize_split_chain(const SplitChain& chain) {
  ordered_json obj;
  obj["master_seed"] = chain.master_seed;
  obj["sizes"] = chain.sizes;
  obj["permutation"] = chain.permutation;
  return obj.dump() + "\n";
}

SplitChain parse_split_chain(std::string_view json_text) {
  SplitChain chain;
  try {
    auto obj = json::parse(json_text);
    chain.master_seed = obj.at("master_seed").get<Seed>();
    chain.sizes = obj.at("sizes").get<std::vector<std::size_t>>();
    chain.permutation = obj.at("permutation").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(std::string("malformed split file: ") + e.what());
  }
  if (chain.sizes.empty() || chain.sizes.back() > chain.permutation.size()) {
    throw Error("malformed split file: sizes exceed permutation length");
  }
  for (std::size_t i = 1; i < chain.sizes.size(); ++i) {
    if (chain.sizes[i] <= chain.sizes[i - 1]) {
      throw Error("malformed split file: sizes not strictly increasing");
    }
  }
  std::unordered_map<std::string_view, int> seen;
  for (const auto& id : chain.permutation) {
    if (!seen.emplace(id, 0).second) {
      throw Error("malformed split file: duplicate id " + id);
    }
  }
  return chain;
}

void save_split_chain(const SplitChain& chain, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_split_chain(chain));
}

SplitChain load_split_chain(const std::filesystem::path& path) {
  return parse_split_chain(read_file(path));
}

}  // namespace videoweave
