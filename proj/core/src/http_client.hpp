#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace pivotmt::detail {

struct HttpConfig {
  std::string base_url;
  std::string api_key;     // sent as a bearer token when non-empty
  int timeout_sec = 30;
  int max_retries = 3;     // additional attempts after the first
  int backoff_ms = 500;    // doubled per retry
};

/// POST a JSON body, return the parsed JSON response. Retries transport
/// failures and 5xx with exponential backoff; maps context-window
/// rejections to ContextOverflowError; other 4xx fail immediately.
nlohmann::json post_json(const HttpConfig& cfg, const std::string& path,
                         const nlohmann::json& body);

}  // namespace pivotmt::detail
