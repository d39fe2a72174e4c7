#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "videoweave/embeddings.hpp"
#include "videoweave/rng.hpp"

namespace videoweave {

/// Dense row-major matrix of doubles; one row per point or centroid.
class PointMatrix {
 public:
  PointMatrix() = default;
  PointMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  PointMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static PointMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static PointMatrix from_pooled(std::span<const PooledEmbedding> pooled);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }
  std::span<double> row(std::size_t i) { return std::span<double>(data_).subspan(i * cols_, cols_); }
  std::span<const double> data() const noexcept { return data_; }

  /// Rows selected by index, in the given order.
  PointMatrix select(std::span<const std::size_t> indices) const;

  friend bool operator==(const PointMatrix&, const PointMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

using ClusterId = std::uint32_t;

/// farthest_first: the first centroid is a seeded uniform pick, each next one
/// the point farthest from those already chosen (ties to the lowest index).
/// uniform: K distinct rows uniformly without replacement.
enum class InitMethod { farthest_first, uniform };
std::string_view to_string(InitMethod m) noexcept;
InitMethod parse_init_method(std::string_view text);

/// Balanced K-means parameters. Distance is squared Euclidean.
struct ClusterConfig {
  std::size_t clusters = 1;  // K
  std::size_t capacity = 1;  // d, members per cluster
  Seed seed = 0;
  std::size_t max_iters = 100;
  InitMethod init = InitMethod::farthest_first;

  /// Throws unless K >= 1, d >= 1, max_iters >= 1 and point_count == K*d.
  void validate(std::size_t point_count) const;
};

enum class StopReason { converged, cycle, max_iters };
std::string_view to_string(StopReason r) noexcept;

struct ClusterModel {
  PointMatrix centroids;
  std::vector<ClusterId> assignments;  // point index -> cluster
  std::size_t capacity = 0;
  std::size_t iterations_run = 0;  // number of centroid updates performed
  bool converged = false;
  StopReason stop = StopReason::max_iters;
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // one entry per assignment pass
};

/// K distinct point rows, selected by `method`.
PointMatrix init_centroids(const PointMatrix& points, std::size_t clusters, Seed seed,
                           InitMethod method = InitMethod::farthest_first);

/// Greedy capacity-constrained assignment. Points are visited in `order`;
/// each goes to the nearest centroid whose occupancy is still below
/// `capacity`, ties resolved to the lowest cluster index.
std::vector<ClusterId> assign_capacity(const PointMatrix& points, const PointMatrix& centroids,
                                       std::size_t capacity, std::span<const std::size_t> order);

/// Member means. Throws Error on an empty cluster.
PointMatrix update_centroids(const PointMatrix& points, std::span<const ClusterId> assignments,
                             std::size_t clusters);

double compute_inertia(const PointMatrix& points, const PointMatrix& centroids,
                       std::span<const ClusterId> assignments);

/// Called after each assignment pass with the 1-based pass number.
using IterationObserver =
    std::function<void(std::size_t pass, std::span<const ClusterId> assignments, double inertia)>;

/// Alternates assign_capacity and update_centroids. Each pass visits the
/// points in a fresh seeded shuffle. Stops when the assignment equals the
/// previous one (converged), repeats any earlier one (cycle), or after
/// max_iters passes. The returned centroids are the means of the final
/// assignment.
ClusterModel fit_balanced_kmeans(const PointMatrix& points, const ClusterConfig& config,
                                 const IterationObserver& observer = {});

struct BruteForceResult {
  std::vector<ClusterId> assignments;
  double inertia = 0.0;
  std::size_t partitions = 0;
};

inline constexpr std::size_t kBruteForceMaxPoints = 12;

/// Exhaustive search over all balanced partitions (labels canonical by first
/// occurrence). Returns the minimum-SSE partition; ties keep the
/// lexicographically smallest assignment vector.
BruteForceResult brute_force_balanced(const PointMatrix& points, std::size_t clusters,
                                      std::size_t capacity);

/// Relabels so clusters are numbered by first appearance. Two assignment
/// vectors describe the same partition iff their canonical forms match.
std::vector<ClusterId> canonical_labels(std::span<const ClusterId> assignments);

struct RemainderSplit {
  std::vector<std::size_t> kept;     // ascending point indices
  std::vector<std::size_t> dropped;  // farthest-first
};

/// Drops the (n mod capacity) points farthest from the global mean.
RemainderSplit drop_remainder(const PointMatrix& points, std::size_t capacity);

/// On-disk clustering result, keyed by video_id.
struct ClusterFile {
  ClusterConfig config;
  bool normalized = true;
  std::vector<std::string> video_ids;  // point order
  std::vector<std::string> dropped_ids;
  ClusterModel model;

  ClusterId cluster_of(std::string_view video_id) const;
};

std::string serialize_cluster_file(const ClusterFile& file);
ClusterFile parse_cluster_file(std::string_view json_text);
void save_cluster_file(const ClusterFile& file, const std::filesystem::path& path);
ClusterFile load_cluster_file(const std::filesystem::path& path);

}  // namespace videoweave
