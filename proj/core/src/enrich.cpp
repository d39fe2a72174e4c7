#include "videoweave/enrich.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "videoweave/hash.hpp"
#include "videoweave/io.hpp"

namespace videoweave {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : std::move(fallback);
}

}  // namespace

std::string make_group_key(std::string_view template_id, std::span<const std::string> captions) {
  Sha256 h;
  h.update(template_id);
  h.update("\n");
  for (const auto& c : captions) {
    h.update(std::to_string(c.size()));
    h.update(":");
    h.update(c);
    h.update("\n");
  }
  return h.hex_digest();
}

EnrichmentRequest make_request(std::vector<std::string> captions, std::string_view template_id) {
  EnrichmentRequest req;
  req.template_id = std::string(template_id);
  req.group_key = make_group_key(template_id, captions);
  req.captions = std::move(captions);
  return req;
}

std::string render_prompt(std::span<const std::string> captions) {
  std::ostringstream out;
  out << "The following " << captions.size()
      << " captions describe short video clips that are played back to back as one video.\n"
         "Rewrite them into a single cohesive caption for the whole video, following the clip order.\n"
         "Keep all of the semantic information in the input captions and do not add new details.\n"
         "Reply with the caption only.\n\n"
         "Captions:\n";
  for (std::size_t i = 0; i < captions.size(); ++i) {
    out << (i + 1) << ". " << captions[i] << "\n";
  }
  return out.str();
}

HttpChatClient::Options HttpChatClient::options_from_env() {
  Options o;
  o.endpoint = env_or("VIDEOWEAVE_LLM_ENDPOINT", "");
  if (o.endpoint.empty()) {
    throw Error("VIDEOWEAVE_LLM_ENDPOINT is not set");
  }
  o.api_key = env_or("VIDEOWEAVE_LLM_API_KEY", "");
  o.settings.model = env_or("VIDEOWEAVE_LLM_MODEL", o.settings.model);
  return o;
}

HttpChatClient::HttpChatClient(Options options) : options_(std::move(options)) {
  const auto& url = options_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error("endpoint must be an absolute http(s) URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

HttpChatClient::~HttpChatClient() = default;

std::string HttpChatClient::provider_tag() const {
  return "http:" + options_.settings.model;
}

std::string HttpChatClient::complete(const std::string& prompt) {
  httplib::Client cli(origin_);
  cli.set_connection_timeout(options_.timeout);
  cli.set_read_timeout(options_.timeout);
  cli.set_write_timeout(options_.timeout);
  if (!options_.api_key.empty()) {
    cli.set_bearer_token_auth(options_.api_key);
  }

  ordered_json body;
  body["model"] = options_.settings.model;
  body["messages"] = ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = options_.settings.temperature;
  body["max_tokens"] = options_.settings.max_tokens;

  auto res = cli.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw TransportError("request to " + origin_ + path_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("service returned HTTP " + std::to_string(res->status));
  }
  try {
    auto reply = json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected response body: ") + e.what());
  }
}

EnrichmentCache::EnrichmentCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path EnrichmentCache::path_for(std::string_view group_key) const {
  return dir_ / (std::string(group_key) + ".json");
}

std::optional<EnrichmentResult> EnrichmentCache::load(std::string_view group_key) const {
  const auto path = path_for(group_key);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    return std::nullopt;
  }
  try {
    auto obj = json::parse(read_file(path));
    EnrichmentResult r;
    r.group_key = obj.at("group_key").get<std::string>();
    r.enriched_caption = obj.at("enriched_caption").get<std::string>();
    r.provider_tag = obj.at("provider_tag").get<std::string>();
    if (r.group_key != group_key || blank(r.enriched_caption)) {
      return std::nullopt;
    }
    r.cached = true;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void EnrichmentCache::store(const EnrichmentResult& result) const {
  ordered_json obj;
  obj["group_key"] = result.group_key;
  obj["enriched_caption"] = result.enriched_caption;
  obj["provider_tag"] = result.provider_tag;
  write_file_atomic(path_for(result.group_key), obj.dump() + "\n");
}

EnrichmentResult enrich(const EnrichmentRequest& request, ChatClient* client,
                        const EnrichmentCache* cache, const RetryPolicy& retry) {
  if (request.captions.empty()) {
    throw Error("enrichment request has no captions");
  }
  if (client == nullptr) {
    return EnrichmentResult{request.group_key, compose_caption(request.captions),
                            std::string(kDryRunProvider), false};
  }
  if (cache != nullptr) {
    if (auto hit = cache->load(request.group_key)) {
      return *hit;
    }
  }

  const auto prompt = render_prompt(request.captions);
  const auto attempts = std::max<std::size_t>(retry.attempts, 1);
  std::string reply;
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      reply = client->complete(prompt);
      break;
    } catch (const TransportError& e) {
      if (attempt + 1 >= attempts) {
        throw TransportError("enrichment failed for group " + request.group_key + " after " +
                             std::to_string(attempts) + " attempts: " + e.what());
      }
      const auto delay = retry.base_delay * (std::size_t{1} << attempt);
      if (retry.sleep) {
        retry.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
  }
  if (blank(reply)) {
    throw Error("degenerate enrichment for group " + request.group_key);
  }

  EnrichmentResult result{request.group_key, std::move(reply), client->provider_tag(), false};
  if (cache != nullptr) {
    cache->store(result);
  }
  return result;
}

std::vector<WovenSample> enrich_epoch(const Catalog& catalog, std::span<const WovenSample> samples,
                                      ChatClient* client, const EnrichmentCache* cache,
                                      const RetryPolicy& retry, std::size_t concurrency) {
  std::vector<WovenSample> out(samples.begin(), samples.end());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= out.size()) {
        return;
      }
      {
        std::lock_guard lock(error_mu);
        if (first_error) {
          return;
        }
      }
      try {
        std::vector<std::string> captions;
        for (const auto& clip : out[i].clips) {
          captions.push_back(catalog.at(clip.video_id).caption);
        }
        out[i].caption = enrich(make_request(std::move(captions)), client, cache, retry).enriched_caption;
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) {
          first_error = std::current_exception();
        }
        return;
      }
    }
  };

  concurrency = std::clamp<std::size_t>(concurrency, 1, std::max<std::size_t>(out.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < concurrency; ++t) {
      pool.emplace_back(worker);
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
  return out;
}

}  // namespace videoweave
