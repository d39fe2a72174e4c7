#include "videoweave/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "videoweave/error.hpp"
#include "videoweave/io.hpp"

namespace videoweave {

using nlohmann::json;
using nlohmann::ordered_json;

PointMatrix::PointMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error("point matrix data size does not match shape");
  }
}

PointMatrix PointMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) {
    return {};
  }
  const auto cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) {
      throw Error("ragged point rows");
    }
    data.insert(data.end(), r.begin(), r.end());
  }
  return PointMatrix(rows.size(), cols, std::move(data));
}

PointMatrix PointMatrix::from_pooled(std::span<const PooledEmbedding> pooled) {
  if (pooled.empty()) {
    return {};
  }
  const auto cols = pooled.front().vector.size();
  std::vector<double> data;
  data.reserve(pooled.size() * cols);
  for (const auto& p : pooled) {
    if (p.vector.size() != cols) {
      throw Error("pooled embedding dim mismatch for " + p.video_id);
    }
    data.insert(data.end(), p.vector.begin(), p.vector.end());
  }
  return PointMatrix(pooled.size(), cols, std::move(data));
}

PointMatrix PointMatrix::select(std::span<const std::size_t> indices) const {
  PointMatrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

void ClusterConfig::validate(std::size_t point_count) const {
  if (clusters == 0) {
    throw Error("cluster count K must be >= 1");
  }
  if (capacity == 0) {
    throw Error("cluster capacity d must be >= 1");
  }
  if (max_iters == 0) {
    throw Error("max_iters must be >= 1");
  }
  if (clusters * capacity != point_count) {
    throw Error("balanced clustering needs exactly K*d = " + std::to_string(clusters * capacity) +
                " points, got " + std::to_string(point_count));
  }
}

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::converged:
      return "converged";
    case StopReason::cycle:
      return "cycle";
    case StopReason::max_iters:
      return "max_iters";
  }
  return "unknown";
}

std::string_view to_string(InitMethod m) noexcept {
  switch (m) {
    case InitMethod::farthest_first:
      return "farthest_first";
    case InitMethod::uniform:
      return "uniform";
  }
  return "unknown";
}

InitMethod parse_init_method(std::string_view text) {
  if (text == "farthest_first" || text == "farthest-first") {
    return InitMethod::farthest_first;
  }
  if (text == "uniform") {
    return InitMethod::uniform;
  }
  throw Error("unknown init method: " + std::string(text) + " (expected farthest_first or uniform)");
}

PointMatrix init_centroids(const PointMatrix& points, std::size_t clusters, Seed seed, InitMethod method) {
  if (clusters == 0) {
    throw Error("cluster count K must be >= 1");
  }
  const auto n = points.rows();
  if (n < clusters) {
    throw Error("cannot pick " + std::to_string(clusters) + " initial centroids from " +
                std::to_string(n) + " points");
  }
  Rng rng(derive_seed(seed, "init"));
  std::vector<std::size_t> idx;
  idx.reserve(clusters);

  if (method == InitMethod::uniform) {
    // Partial Fisher-Yates: the first K slots are a uniform K-subset in random order.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < clusters; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform(n - i));
      std::swap(perm[i], perm[j]);
    }
    idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(clusters));
    return points.select(idx);
  }

  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  std::size_t next = static_cast<std::size_t>(rng.uniform(n));
  for (std::size_t c = 0; c < clusters; ++c) {
    idx.push_back(next);
    taken[next] = 1;
    const auto centre = points.row(next);
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) {
        continue;
      }
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centre));
      if (nearest[i] > best_d) {
        best_d = nearest[i];
        best = i;
      }
    }
    next = best;
  }
  return points.select(idx);
}

std::vector<ClusterId> assign_capacity(const PointMatrix& points, const PointMatrix& centroids,
                                       std::size_t capacity, std::span<const std::size_t> order) {
  const auto n = points.rows();
  const auto k = centroids.rows();
  if (centroids.cols() != points.cols()) {
    throw Error("centroid dim does not match point dim");
  }
  if (order.size() != n) {
    throw Error("assignment order must cover every point");
  }
  if (capacity == 0 || k * capacity != n) {
    throw Error("capacity-exact assignment needs n == K*d");
  }

  constexpr auto kUnassigned = std::numeric_limits<ClusterId>::max();
  std::vector<ClusterId> assignments(n, kUnassigned);
  std::vector<std::size_t> occupancy(k, 0);
  for (std::size_t i : order) {
    if (i >= n || assignments[i] != kUnassigned) {
      throw Error("assignment order is not a permutation of the points");
    }
    const auto x = points.row(i);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (occupancy[c] >= capacity) {
        continue;
      }
      const double dist = squared_distance(x, centroids.row(c));
      if (dist < best || best_k == k) {
        best = dist;
        best_k = c;
      }
    }
    assignments[i] = static_cast<ClusterId>(best_k);
    ++occupancy[best_k];
  }
  return assignments;
}

PointMatrix update_centroids(const PointMatrix& points, std::span<const ClusterId> assignments,
                             std::size_t clusters) {
  if (assignments.size() != points.rows()) {
    throw Error("assignment count does not match point count");
  }
  PointMatrix centroids(clusters, points.cols());
  std::vector<std::size_t> counts(clusters, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto c = assignments[i];
    if (c >= clusters) {
      throw Error("cluster id out of range");
    }
    auto dst = centroids.row(c);
    auto src = points.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] += src[j];
    }
    ++counts[c];
  }
  for (std::size_t c = 0; c < clusters; ++c) {
    if (counts[c] == 0) {
      throw Error("internal invariant violated: cluster " + std::to_string(c) + " is empty");
    }
    for (auto& v : centroids.row(c)) {
      v /= static_cast<double>(counts[c]);
    }
  }
  return centroids;
}

double compute_inertia(const PointMatrix& points, const PointMatrix& centroids,
                       std::span<const ClusterId> assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    total += squared_distance(points.row(i), centroids.row(assignments[i]));
  }
  return total;
}

namespace {

std::uint64_t fingerprint(std::span<const ClusterId> a) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto v : a) {
    h = (h ^ v) * 0x100000001b3ULL;
  }
  return mix64(h);
}

}  // namespace

ClusterModel fit_balanced_kmeans(const PointMatrix& points, const ClusterConfig& config,
                                 const IterationObserver& observer) {
  config.validate(points.rows());
  const auto n = points.rows();
  const auto k = config.clusters;

  ClusterModel model;
  model.capacity = config.capacity;
  PointMatrix centroids = init_centroids(points, k, config.seed, config.init);

  std::vector<std::vector<ClusterId>> history;
  std::unordered_multimap<std::uint64_t, std::size_t> seen;
  std::vector<ClusterId> current;
  model.stop = StopReason::max_iters;

  for (std::size_t pass = 1; pass <= config.max_iters; ++pass) {
    Rng order_rng(derive_seed(config.seed, "order", {pass}));
    const auto order = shuffled_indices(n, order_rng);
    current = assign_capacity(points, centroids, config.capacity, order);

    const double pass_inertia = compute_inertia(points, centroids, current);
    model.inertia_trace.push_back(pass_inertia);
    if (observer) {
      observer(pass, current, pass_inertia);
    }

    if (!history.empty() && current == history.back()) {
      model.stop = StopReason::converged;
      break;
    }
    const auto fp = fingerprint(current);
    auto [lo, hi] = seen.equal_range(fp);
    if (std::any_of(lo, hi, [&](const auto& e) { return history[e.second] == current; })) {
      model.stop = StopReason::cycle;
      break;
    }
    seen.emplace(fp, history.size());
    history.push_back(current);

    centroids = update_centroids(points, current, k);
    ++model.iterations_run;
  }

  model.converged = model.stop == StopReason::converged;
  model.centroids = update_centroids(points, current, k);
  model.inertia = compute_inertia(points, model.centroids, current);
  model.assignments = std::move(current);
  return model;
}

BruteForceResult brute_force_balanced(const PointMatrix& points, std::size_t clusters,
                                      std::size_t capacity) {
  const auto n = points.rows();
  if (n > kBruteForceMaxPoints) {
    throw Error("brute-force balanced partitioning is limited to " +
                std::to_string(kBruteForceMaxPoints) + " points (got " + std::to_string(n) +
                "); use fit_balanced_kmeans for larger inputs");
  }
  if (clusters == 0 || capacity == 0 || clusters * capacity != n) {
    throw Error("brute-force balanced partitioning needs n == K*d");
  }

  BruteForceResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  std::vector<ClusterId> labels(n, 0);
  std::vector<std::size_t> counts(clusters, 0);

  // Canonical labels: point i may join any open existing cluster or open
  // cluster number `used`. Enumeration order is lexicographic.
  auto recurse = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == n) {
      ++best.partitions;
      const auto centroids = update_centroids(points, labels, clusters);
      const double sse = compute_inertia(points, centroids, labels);
      if (sse < best.inertia) {
        best.inertia = sse;
        best.assignments = labels;
      }
      return;
    }
    const auto limit = std::min(used + 1, clusters);
    for (std::size_t c = 0; c < limit; ++c) {
      if (counts[c] >= capacity) {
        continue;
      }
      labels[i] = static_cast<ClusterId>(c);
      ++counts[c];
      self(self, i + 1, c == used ? used + 1 : used);
      --counts[c];
    }
  };
  recurse(recurse, 0, 0);
  return best;
}

std::vector<ClusterId> canonical_labels(std::span<const ClusterId> assignments) {
  std::unordered_map<ClusterId, ClusterId> remap;
  std::vector<ClusterId> out;
  out.reserve(assignments.size());
  for (auto a : assignments) {
    auto [it, inserted] = remap.emplace(a, static_cast<ClusterId>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

RemainderSplit drop_remainder(const PointMatrix& points, std::size_t capacity) {
  if (capacity == 0) {
    throw Error("cluster capacity d must be >= 1");
  }
  const auto n = points.rows();
  const auto extra = n % capacity;
  RemainderSplit out;
  if (extra == 0) {
    out.kept.resize(n);
    std::iota(out.kept.begin(), out.kept.end(), std::size_t{0});
    return out;
  }

  std::vector<double> mean(points.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = points.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      mean[j] += r[j];
    }
  }
  for (auto& m : mean) {
    m /= static_cast<double>(n);
  }
  std::vector<std::pair<double, std::size_t>> by_dist;
  by_dist.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    by_dist.emplace_back(squared_distance(points.row(i), mean), i);
  }
  // Farthest first; equal distances drop the higher index first.
  std::sort(by_dist.begin(), by_dist.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  for (std::size_t i = 0; i < extra; ++i) {
    out.dropped.push_back(by_dist[i].second);
  }
  for (std::size_t i = extra; i < n; ++i) {
    out.kept.push_back(by_dist[i].second);
  }
  std::sort(out.kept.begin(), out.kept.end());
  return out;
}

ClusterId ClusterFile::cluster_of(std::string_view video_id) const {
  for (std::size_t i = 0; i < video_ids.size(); ++i) {
    if (video_ids[i] == video_id) {
      return model.assignments.at(i);
    }
  }
  throw Error("video_id not in cluster file: " + std::string(video_id));
}

std::string serialize_cluster_file(const ClusterFile& file) {
  const auto& m = file.model;
  ordered_json cfg;
  cfg["clusters"] = file.config.clusters;
  cfg["capacity"] = file.config.capacity;
  cfg["seed"] = file.config.seed;
  cfg["max_iters"] = file.config.max_iters;
  cfg["init"] = std::string(to_string(file.config.init));
  cfg["distance"] = "squared_euclidean";
  cfg["normalized"] = file.normalized;

  ordered_json out;
  out["config"] = cfg;
  out["converged"] = m.converged;
  out["stop_reason"] = std::string(to_string(m.stop));
  out["iterations_run"] = m.iterations_run;
  out["inertia"] = m.inertia;
  out["inertia_trace"] = m.inertia_trace;
  ordered_json centroids = ordered_json::array();
  for (std::size_t c = 0; c < m.centroids.rows(); ++c) {
    auto r = m.centroids.row(c);
    centroids.push_back(std::vector<double>(r.begin(), r.end()));
  }
  out["centroids"] = std::move(centroids);
  out["video_ids"] = file.video_ids;
  ordered_json assignments = ordered_json::object();
  for (std::size_t i = 0; i < file.video_ids.size(); ++i) {
    assignments[file.video_ids[i]] = m.assignments.at(i);
  }
  out["assignments"] = std::move(assignments);
  out["dropped"] = file.dropped_ids;
  return out.dump() + "\n";
}

ClusterFile parse_cluster_file(std::string_view json_text) {
  ClusterFile file;
  try {
    auto obj = json::parse(json_text);
    const auto& cfg = obj.at("config");
    file.config.clusters = cfg.at("clusters").get<std::size_t>();
    file.config.capacity = cfg.at("capacity").get<std::size_t>();
    file.config.seed = cfg.at("seed").get<Seed>();
    file.config.max_iters = cfg.at("max_iters").get<std::size_t>();
    file.config.init = parse_init_method(cfg.value("init", std::string("farthest_first")));
    file.normalized = cfg.at("normalized").get<bool>();

    auto& m = file.model;
    m.capacity = file.config.capacity;
    m.converged = obj.at("converged").get<bool>();
    const auto stop = obj.at("stop_reason").get<std::string>();
    m.stop = stop == "converged" ? StopReason::converged
             : stop == "cycle"   ? StopReason::cycle
                                 : StopReason::max_iters;
    m.iterations_run = obj.at("iterations_run").get<std::size_t>();
    m.inertia = obj.at("inertia").get<double>();
    m.inertia_trace = obj.at("inertia_trace").get<std::vector<double>>();
    m.centroids = PointMatrix::from_rows(obj.at("centroids").get<std::vector<std::vector<double>>>());
    file.video_ids = obj.at("video_ids").get<std::vector<std::string>>();
    const auto& assignments = obj.at("assignments");
    m.assignments.reserve(file.video_ids.size());
    for (const auto& id : file.video_ids) {
      m.assignments.push_back(assignments.at(id).get<ClusterId>());
    }
    file.dropped_ids = obj.at("dropped").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(std::string("malformed cluster file: ") + e.what());
  }

  file.config.validate(file.video_ids.size());
  std::vector<std::size_t> counts(file.config.clusters, 0);
  for (auto a : file.model.assignments) {
    if (a >= file.config.clusters) {
      throw Error("malformed cluster file: cluster id out of range");
    }
    ++counts[a];
  }
  if (std::any_of(counts.begin(), counts.end(),
                  [&](std::size_t c) { return c != file.config.capacity; })) {
    throw Error("malformed cluster file: clusters are not capacity-exact");
  }
  return file;
}

void save_cluster_file(const ClusterFile& file, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_cluster_file(file));
}

ClusterFile load_cluster_file(const std::filesystem::path& path) {
  return parse_cluster_file(read_file(path));
}

}  // namespace videoweave
