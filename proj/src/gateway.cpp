#include "procedit/gateway.hpp"

#include <openssl/evp.h>

#include <ctime>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "text_util.hpp"

namespace procedit {

using nlohmann::json;
using nlohmann::ordered_json;

void GenerationSettings::validate() const {
  if (!(temperature >= 0.0)) throw InputError("temperature must be >= 0");
  if (max_tokens < 1) throw InputError("max_tokens must be >= 1");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw InputError("top_p must be in (0, 1]");
}

std::string chat_request_body(const CompletionRequest& request) {
  const auto& s = request.settings;
  ordered_json body;
  body["model"] = s.model;
  body["messages"] = ordered_json::array({ordered_json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = s.temperature;
  body["max_tokens"] = s.max_tokens;
  body["top_p"] = s.top_p;
  body["frequency_penalty"] = s.frequency_penalty;
  body["presence_penalty"] = s.presence_penalty;
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) throw EndpointError(200, "response is not JSON");
  try {
    const json& message = parsed.at("choices").at(0).at("message");
    const json& content = message.at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw EndpointError(200, "response has no choices[0].message.content");
  }
}

std::string cache_key(const CompletionRequest& request) {
  const auto& s = request.settings;
  // json objects keep keys sorted, so the dump is canonical.
  json canonical{{"model", s.model},
                 {"prompt", request.prompt},
                 {"temperature", s.temperature},
                 {"max_tokens", s.max_tokens},
                 {"top_p", s.top_p},
                 {"frequency_penalty", s.frequency_penalty},
                 {"presence_penalty", s.presence_penalty}};
  std::string text = canonical.dump();

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0x0f];
  }
  return hex;
}

namespace {

class HttpTransport final : public Transport {
public:
  HttpTransport(const std::string& base_url, std::chrono::seconds timeout) : timeout_(timeout) {
    std::size_t scheme = base_url.find("://");
    std::size_t slash = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash == std::string::npos) {
      origin_ = base_url;
    } else {
      origin_ = base_url.substr(0, slash);
      prefix_ = base_url.substr(slash);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
  }

  HttpResponse post(const std::string& path, const std::string& body, const HttpHeaders& headers) override {
    // One client per call; httplib clients are not meant for concurrent use.
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers request_headers;
    for (const auto& [name, value] : headers) request_headers.emplace(name, value);

    auto result = client.Post(prefix_ + path, request_headers, body, "application/json");
    if (!result) {
      HttpResponse failed;
      auto error = result.error();
      failed.failure = (error == httplib::Error::Read || error == httplib::Error::Write)
                           ? HttpResponse::Failure::timeout
                           : HttpResponse::Failure::connection;
      failed.body = httplib::to_string(error);
      return failed;
    }
    return {result->status, result->body, HttpResponse::Failure::none};
  }

private:
  std::string origin_;
  std::string prefix_;
  std::chrono::seconds timeout_;
};

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

} // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url, std::chrono::seconds timeout) {
  return std::make_unique<HttpTransport>(base_url, timeout);
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::is_blank(line)) continue;
    json entry = json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.is_object() || !entry.contains("key") || !entry.contains("response") ||
        !entry["key"].is_string() || !entry["response"].is_string()) {
      ++skipped_;
      continue;
    }
    entries_.try_emplace(entry["key"].get<std::string>(), entry["response"].get<std::string>());
  }
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::store(const std::string& key, const std::string& response) {
  std::unique_lock lock(mutex_);
  if (!entries_.try_emplace(key, response).second) return;
  if (!path_) return;
  std::ofstream out(*path_, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot append to cache file " + path_->string());
  ordered_json entry{{"key", key}, {"response", response}, {"timestamp", utc_timestamp()}};
  out << entry.dump() << '\n';
  out.flush();
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void InFlightLimit::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return free_ > 0; });
  --free_;
}

void InFlightLimit::release() {
  {
    std::lock_guard lock(mutex_);
    ++free_;
  }
  cv_.notify_one();
}

Gateway::Gateway(std::shared_ptr<Transport> transport, std::shared_ptr<ResponseCache> cache, Options options)
    : transport_(std::move(transport)),
      cache_(std::move(cache)),
      options_(std::move(options)),
      in_flight_(std::make_shared<InFlightLimit>(options_.max_in_flight)) {
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (options_.replay && !cache_) throw InputError("replay mode needs a response cache");
  if (!options_.replay && !transport_) throw InputError("live gateway needs a transport");
}

Gateway Gateway::replay(std::shared_ptr<ResponseCache> cache, std::shared_ptr<Transport> transport) {
  Options options;
  options.replay = true;
  return Gateway(std::move(transport), std::move(cache), std::move(options));
}

Gateway replay_mode(const std::filesystem::path& cache_path, std::shared_ptr<Transport> transport) {
  if (!std::filesystem::exists(cache_path)) throw InputError("cache file not found: " + cache_path.string());
  return Gateway::replay(std::make_shared<ResponseCache>(cache_path), std::move(transport));
}

std::string Gateway::complete(const CompletionRequest& request) {
  if (detail::is_blank(request.prompt)) throw InputError("prompt is empty");
  request.settings.validate();

  const std::string key = cache_key(request);
  if (cache_) {
    if (auto hit = cache_->lookup(key)) {
      cache_hits_.fetch_add(1);
      return *hit;
    }
  }
  if (options_.replay) throw CacheMiss(key);

  std::string text = send_with_retries(request);
  if (cache_) cache_->store(key, text);
  return text;
}

std::string Gateway::send_with_retries(const CompletionRequest& request) {
  HttpHeaders headers{{"Content-Type", "application/json"}};
  if (!options_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + options_.api_key);
  const std::string body = chat_request_body(request);

  struct SlotGuard {
    InFlightLimit& limit;
    explicit SlotGuard(InFlightLimit& l) : limit(l) { limit.acquire(); }
    ~SlotGuard() { limit.release(); }
  };

  auto backoff = options_.retry.initial_backoff;
  HttpResponse last;
  for (int attempt = 0;; ++attempt) {
    {
      SlotGuard slot(*in_flight_);
      requests_sent_.fetch_add(1);
      last = transport_->post(options_.path, body, headers);
    }
    if (last.failure == HttpResponse::Failure::none) {
      if (last.status >= 200 && last.status < 300) return parse_chat_response(last.body);
      if (last.status == 401 || last.status == 403) throw AuthError("endpoint rejected the credential");
      bool transient = last.status == 429 || last.status >= 500;
      if (!transient) throw EndpointError(last.status, last.body);
    }
    if (attempt >= options_.retry.max_retries) break;
    options_.sleep(backoff);
    backoff = std::min(backoff * 2, options_.retry.max_backoff);
  }

  switch (last.failure) {
  case HttpResponse::Failure::timeout: throw TimeoutError("request timed out: " + last.body);
  case HttpResponse::Failure::connection: throw EndpointError(0, "connection failed: " + last.body);
  case HttpResponse::Failure::none: break;
  }
  throw EndpointError(last.status, "retries exhausted");
}

} // namespace procedit
