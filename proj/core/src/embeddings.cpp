#include "videoweave/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "videoweave/error.hpp"
#include "videoweave/io.hpp"

namespace videoweave {

static_assert(std::endian::native == std::endian::little,
              "embedding IO assumes a little-endian host");
static_assert(std::numeric_limits<float>::is_iec559);

void FrameEmbeddingMatrix::validate() const {
  if (dim == 0) {
    throw Error("embedding for " + video_id + ": dim must be >= 1");
  }
  if (values.empty() || values.size() % dim != 0) {
    throw Error("embedding for " + video_id + ": value count is not a positive multiple of dim");
  }
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw Error("embedding for " + video_id + ": non-finite value");
    }
  }
}

void EmbeddingSet::add(FrameEmbeddingMatrix matrix) {
  matrix.validate();
  if (dim_ == 0) {
    dim_ = matrix.dim;
  }
  if (matrix.dim != dim_) {
    throw Error("embedding for " + matrix.video_id + ": dim " + std::to_string(matrix.dim) +
                " does not match set dim " + std::to_string(dim_));
  }
  if (!index_.emplace(matrix.video_id, matrices_.size()).second) {
    throw Error("duplicate embedding id: " + matrix.video_id);
  }
  matrices_.push_back(std::move(matrix));
}

const FrameEmbeddingMatrix* EmbeddingSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &matrices_[it->second];
}

namespace {

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t offset() const noexcept { return pos_; }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw Error("truncated embedding file at byte offset " + std::to_string(pos_) +
                  " while reading " + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_embeddings(const EmbeddingSet& set) {
  if (set.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("too many embedding records");
  }
  std::string out;
  out.append(kEmbeddingMagic, 4);
  put<std::uint32_t>(out, kEmbeddingVersion);
  put<std::uint32_t>(out, set.dim());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(set.size()));
  for (const auto& m : set.matrices()) {
    if (m.video_id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error("video_id too long for embedding file: " + m.video_id);
    }
    if (m.rows() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error("too many frame rows for " + m.video_id);
    }
    put<std::uint16_t>(out, static_cast<std::uint16_t>(m.video_id.size()));
    out.append(m.video_id);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(m.rows()));
    out.append(reinterpret_cast<const char*>(m.values.data()), m.values.size() * sizeof(float));
  }
  return out;
}

EmbeddingSet parse_embeddings(std::string_view bytes) {
  Reader rd(bytes);
  auto magic = rd.take(4, "magic");
  if (std::memcmp(magic.data(), kEmbeddingMagic, 4) != 0) {
    throw Error("bad embedding file magic");
  }
  auto version = rd.get<std::uint32_t>("version");
  if (version != kEmbeddingVersion) {
    throw Error("unsupported embedding file version " + std::to_string(version));
  }
  auto dim = rd.get<std::uint32_t>("dim");
  auto count = rd.get<std::uint32_t>("record count");
  if (dim == 0 && count > 0) {
    throw Error("embedding file declares dim 0");
  }

  EmbeddingSet set(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto record_offset = rd.offset();
    auto id_len = rd.get<std::uint16_t>("id length");
    FrameEmbeddingMatrix m;
    m.video_id = std::string(rd.take(id_len, "video id"));
    m.dim = dim;
    auto rows = rd.get<std::uint16_t>("row count");
    if (rows == 0) {
      throw Error("embedding record at byte offset " + std::to_string(record_offset) +
                  " has zero rows");
    }
    auto payload = rd.take(static_cast<std::size_t>(rows) * dim * sizeof(float), "frame values");
    m.values.resize(static_cast<std::size_t>(rows) * dim);
    std::memcpy(m.values.data(), payload.data(), payload.size());
    if (set.find(m.video_id) != nullptr) {
      throw Error("duplicate embedding id: " + m.video_id);
    }
    set.add(std::move(m));
  }
  if (!rd.done()) {
    throw Error("trailing bytes after embedding record " + std::to_string(count) +
                " at byte offset " + std::to_string(rd.offset()));
  }
  return set;
}

void export_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_embeddings(set));
}

EmbeddingSet import_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_file(path));
}

PooledEmbedding mean_pool(const FrameEmbeddingMatrix& matrix) {
  matrix.validate();
  PooledEmbedding out;
  out.video_id = matrix.video_id;
  out.vector.assign(matrix.dim, 0.0);
  const auto rows = matrix.rows();
  for (std::size_t i = 0; i < rows; ++i) {
    auto r = matrix.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      out.vector[j] += static_cast<double>(r[j]);
    }
  }
  for (auto& x : out.vector) {
    x /= static_cast<double>(rows);
  }
  return out;
}

PooledEmbedding l2_normalize(const PooledEmbedding& v) {
  double sq = 0.0;
  for (double x : v.vector) {
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error("degenerate embedding: " + v.video_id);
  }
  PooledEmbedding out{v.video_id, v.vector, true};
  for (auto& x : out.vector) {
    x /= norm;
  }
  return out;
}

}  // namespace videoweave
