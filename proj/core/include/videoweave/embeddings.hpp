#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace videoweave {

/// Per-frame encoder outputs for one clip, stored row-major as float32.
struct FrameEmbeddingMatrix {
  std::string video_id;
  std::uint32_t dim = 0;
  std::vector<float> values;

  std::size_t rows() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(values).subspan(i * dim, dim);
  }

  /// Throws Error unless rows >= 1, dim >= 1, values.size() % dim == 0 and
  /// every value is finite.
  void validate() const;

  friend bool operator==(const FrameEmbeddingMatrix&, const FrameEmbeddingMatrix&) = default;
};

/// One feature vector per clip. Accumulated and stored in double.
struct PooledEmbedding {
  std::string video_id;
  std::vector<double> vector;
  bool normalized = false;
};

/// Frame-embedding matrices keyed by video_id, kept in insertion order.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(std::uint32_t dim = 0) : dim_(dim) {}

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return matrices_.size(); }
  std::span<const FrameEmbeddingMatrix> matrices() const noexcept { return matrices_; }

  /// Validates the matrix and rejects duplicate ids or a dim mismatch.
  void add(FrameEmbeddingMatrix matrix);
  const FrameEmbeddingMatrix* find(std::string_view id) const;

  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
    return a.dim_ == b.dim_ && a.matrices_ == b.matrices_;
  }

 private:
  std::uint32_t dim_;
  std::vector<FrameEmbeddingMatrix> matrices_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Binary layout, little-endian:
//   "VWEB" | version u32 | dim u32 | count u32 |
//   count x (id_len u16 | id bytes | row_count u16 | row_count*dim f32)
inline constexpr char kEmbeddingMagic[4] = {'V', 'W', 'E', 'B'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

std::string serialize_embeddings(const EmbeddingSet& set);
EmbeddingSet parse_embeddings(std::string_view bytes);
void export_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet import_embeddings(const std::filesystem::path& path);

/// Column-wise arithmetic mean of the frame rows, accumulated in double.
PooledEmbedding mean_pool(const FrameEmbeddingMatrix& matrix);

/// Scales to unit L2 norm. Throws Error("degenerate embedding") for a zero
/// or non-finite norm.
PooledEmbedding l2_normalize(const PooledEmbedding& v);

}  // namespace videoweave
