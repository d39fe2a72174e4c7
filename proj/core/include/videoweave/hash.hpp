#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace videoweave {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

/// Incremental SHA-256 for payloads assembled line by line.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  std::string hex_digest();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace videoweave
