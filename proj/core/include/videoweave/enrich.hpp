#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "videoweave/catalog.hpp"
#include "videoweave/error.hpp"
#include "videoweave/weave.hpp"

namespace videoweave {

// Bump when the prompt text changes; it is part of every cache key.
inline constexpr std::string_view kCaptionTemplateId = "caption-merge-v1";
inline constexpr std::string_view kDryRunProvider = "dry-run";

/// Fixed generation settings, echoed into the manifest header.
struct EnrichmentSettings {
  std::string template_id = std::string(kCaptionTemplateId);
  std::string model = "gpt-4o-mini";
  double temperature = 0.2;
  std::size_t max_tokens = 256;
};

struct EnrichmentRequest {
  std::string group_key;
  std::vector<std::string> captions;
  std::string template_id;
};

struct EnrichmentResult {
  std::string group_key;
  std::string enriched_caption;
  std::string provider_tag;
  bool cached = false;
};

/// SHA-256 over the template id and the ordered, length-prefixed captions.
std::string make_group_key(std::string_view template_id, std::span<const std::string> captions);
EnrichmentRequest make_request(std::vector<std::string> captions,
                               std::string_view template_id = kCaptionTemplateId);

/// Instruction text with one numbered line per input caption.
std::string render_prompt(std::span<const std::string> captions);

/// Service failure that may succeed on retry.
class TransportError : public Error {
 public:
  using Error::Error;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Returns the generated text. Throws TransportError on network or
  /// protocol failure.
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string provider_tag() const = 0;
};

/// Chat-completion client over HTTP(S). Request body:
///   {"model", "messages":[{"role":"user","content":prompt}], "temperature", "max_tokens"}
/// Reply text is read from choices[0].message.content.
class HttpChatClient final : public ChatClient {
 public:
  struct Options {
    std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
    std::string api_key;
    EnrichmentSettings settings;
    std::chrono::seconds timeout{60};
  };

  /// Reads VIDEOWEAVE_LLM_ENDPOINT (required), VIDEOWEAVE_LLM_API_KEY and
  /// VIDEOWEAVE_LLM_MODEL.
  static Options options_from_env();

  explicit HttpChatClient(Options options);
  ~HttpChatClient() override;

  std::string complete(const std::string& prompt) override;
  std::string provider_tag() const override;

 private:
  Options options_;
  std::string origin_;
  std::string path_;
};

/// One JSON file per group_key. Writes are atomic; unreadable or
/// inconsistent entries read as misses.
class EnrichmentCache {
 public:
  explicit EnrichmentCache(std::filesystem::path dir);

  std::optional<EnrichmentResult> load(std::string_view group_key) const;
  void store(const EnrichmentResult& result) const;
  std::filesystem::path path_for(std::string_view group_key) const;

 private:
  std::filesystem::path dir_;
};

struct RetryPolicy {
  std::size_t attempts = 3;
  std::chrono::milliseconds base_delay{1000};
  /// Defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Cache hit -> cached=true. Otherwise calls the client with exponential
/// backoff and stores the reply. A null client means dry-run: the captions
/// joined by single spaces, provider "dry-run", cache untouched.
EnrichmentResult enrich(const EnrichmentRequest& request, ChatClient* client,
                        const EnrichmentCache* cache, const RetryPolicy& retry = {});

/// Returns a copy of `samples` with captions rewritten, using at most
/// `concurrency` in-flight requests. Throws (leaving `samples` untouched) if
/// any group fails.
std::vector<WovenSample> enrich_epoch(const Catalog& catalog, std::span<const WovenSample> samples,
                                      ChatClient* client, const EnrichmentCache* cache,
                                      const RetryPolicy& retry = {}, std::size_t concurrency = 4);

}  // namespace videoweave
