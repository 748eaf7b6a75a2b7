#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "procedit/error.hpp"

namespace procedit {

/// Sampling parameters sent with every chat-completion request. The defaults
/// are the deterministic settings the method was evaluated with.
struct GenerationSettings {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 500;
  double top_p = 1.0;
  double frequency_penalty = 0.1;
  double presence_penalty = 0.0;

  /// Throws InputError unless temperature >= 0, max_tokens >= 1 and
  /// 0 < top_p <= 1.
  void validate() const;

  friend bool operator==(const GenerationSettings&, const GenerationSettings&) = default;
};

/// A single user-role message.
struct CompletionRequest {
  GenerationSettings settings;
  std::string prompt;
};

class GatewayError : public Error {
public:
  using Error::Error;
};

class AuthError : public GatewayError {
public:
  using GatewayError::GatewayError;
};

class EndpointError : public GatewayError {
public:
  EndpointError(int status, const std::string& detail)
      : GatewayError("endpoint error (status " + std::to_string(status) + "): " + detail), status_(status) {}
  int status() const noexcept { return status_; }

private:
  int status_;
};

class TimeoutError : public GatewayError {
public:
  using GatewayError::GatewayError;
};

class CacheMiss : public GatewayError {
public:
  explicit CacheMiss(std::string key) : GatewayError("no cached response for key " + key), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

/// JSON body for POST <base>/chat/completions: model, messages, temperature,
/// max_tokens, top_p, frequency_penalty, presence_penalty, in that order.
std::string chat_request_body(const CompletionRequest& request);

/// First choice's message content from a chat-completions response body.
/// Throws EndpointError when the body does not have that shape.
std::string parse_chat_response(std::string_view body);

/// Hex SHA-256 over a canonical serialization of model, prompt and settings.
std::string cache_key(const CompletionRequest& request);

struct HttpResponse {
  enum class Failure { none, connection, timeout };

  int status = 0;
  std::string body;
  Failure failure = Failure::none;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Moves one request over the wire. Implementations must be callable from
/// several threads at once.
class Transport {
public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& body, const HttpHeaders& headers) = 0;
};

/// cpp-httplib backed transport. `base_url` is "scheme://host[:port][/prefix]";
/// the prefix is prepended to every request path.
std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               std::chrono::seconds timeout = std::chrono::seconds(60));

/// Throws on any use. Handy wherever a code path must stay offline.
class RefusingTransport final : public Transport {
public:
  HttpResponse post(const std::string& path, const std::string&, const HttpHeaders&) override {
    attempts_.fetch_add(1);
    throw Error("network access refused: POST " + path);
  }
  std::size_t attempts() const noexcept { return attempts_.load(); }

private:
  std::atomic<std::size_t> attempts_{0};
};

/// Append-only response cache backed by a file of JSON lines
/// {"key", "response", "timestamp"}. Lines that fail to parse are skipped.
/// Lookups take a shared lock; stores are serialized.
class ResponseCache {
public:
  /// Memory-only cache.
  ResponseCache() = default;
  /// Loads `path` when it exists; new entries are appended to it.
  explicit ResponseCache(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& key) const;
  /// No-op when the key is already present.
  void store(const std::string& key, const std::string& response);

  std::size_t size() const;
  std::size_t skipped_lines() const noexcept { return skipped_; }

private:
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::size_t skipped_ = 0;
};

struct RetryPolicy {
  int max_retries = 4;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
};

/// Counting semaphore sized at runtime.
class InFlightLimit {
public:
  explicit InFlightLimit(std::size_t slots) : free_(slots == 0 ? 1 : slots) {}
  void acquire();
  void release();

private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t free_;
};

/// Chat-completion client with optional caching, retry with exponential
/// backoff and a cap on concurrent requests. A replay gateway answers only
/// from its cache and never touches the transport.
class Gateway {
public:
  struct Options {
    std::string api_key;
    RetryPolicy retry;
    std::size_t max_in_flight = 4;
    std::string path = "/chat/completions";
    std::function<void(std::chrono::milliseconds)> sleep;
    /// Serve only from the cache; misses throw CacheMiss.
    bool replay = false;
  };

  Gateway(std::shared_ptr<Transport> transport, std::shared_ptr<ResponseCache> cache, Options options);

  /// Cache-only gateway. `transport` is accepted so callers can prove it is
  /// never used; it may be null.
  static Gateway replay(std::shared_ptr<ResponseCache> cache, std::shared_ptr<Transport> transport = nullptr);

  /// Throws InputError for an empty prompt or invalid settings, CacheMiss in
  /// replay mode, and AuthError / EndpointError / TimeoutError otherwise.
  std::string complete(const CompletionRequest& request);

  bool replaying() const noexcept { return options_.replay; }
  std::size_t requests_sent() const noexcept { return requests_sent_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

private:
  std::string send_with_retries(const CompletionRequest& request);

  std::shared_ptr<Transport> transport_;
  std::shared_ptr<ResponseCache> cache_;
  Options options_;
  std::shared_ptr<InFlightLimit> in_flight_;
  std::atomic<std::size_t> requests_sent_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

/// Shorthand for Gateway::replay over a cache file that must exist.
Gateway replay_mode(const std::filesystem::path& cache_path, std::shared_ptr<Transport> transport = nullptr);

} // namespace procedit
