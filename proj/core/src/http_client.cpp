#include "http_client.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

#include "pivotmt/errors.hpp"

namespace pivotmt::detail {

namespace {

bool looks_like_context_overflow(const std::string& body) {
  for (const char* needle :
       {"context length", "context_length", "maximum context",
        "context window", "too many tokens"}) {
    if (body.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

nlohmann::json post_json(const HttpConfig& cfg, const std::string& path,
                         const nlohmann::json& body) {
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!cfg.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + cfg.api_key);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
    }
    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(cfg.timeout_sec);
    client.set_read_timeout(cfg.timeout_sec);
    client.set_write_timeout(cfg.timeout_sec);

    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw TransportError("endpoint returned unparseable JSON from " +
                             path + ": " + e.what());
      }
    }
    if (res->status >= 400 && res->status < 500) {
      if (looks_like_context_overflow(res->body)) {
        throw ContextOverflowError("endpoint rejected over-length prompt (" +
                                   std::to_string(res->status) + "): " +
                                   res->body);
      }
      throw TransportError("endpoint error " + std::to_string(res->status) +
                           " from " + path + ": " + res->body);
    }
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
  }
  throw TransportError("request to " + cfg.base_url + path + " failed after " +
                       std::to_string(cfg.max_retries + 1) + " attempts; " +
                       last_error);
}

}  // namespace pivotmt::detail
