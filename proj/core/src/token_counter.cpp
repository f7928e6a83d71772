#include "pivotmt/token_counter.hpp"

#include <fstream>
#include <sstream>

#include "http_client.hpp"
#include "pivotmt/errors.hpp"
#include "pivotmt/text.hpp"

namespace pivotmt {

int64_t WhitespaceTokenCounter::count_tokens(const std::string& text) {
  return static_cast<int64_t>(text::split_ws(text).size());
}

BpeTokenCounter::BpeTokenCounter(const std::string& merges_path) {
  std::ifstream in(merges_path);
  if (!in) throw IoError("cannot open merges file: " + merges_path);
  std::string line;
  int rank = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto parts = text::split_ws(line);
    if (parts.size() != 2) {
      throw ParseError("merges file " + merges_path +
                       ": expected two symbols per line, got '" + line + "'");
    }
    merge_rank_.emplace(parts[0] + "\x1f" + parts[1], rank++);
  }
  id_ = "bpe:" + merges_path;
}

int64_t BpeTokenCounter::count_word(const std::string& word) const {
  std::u32string cps = text::decode_utf8(word);
  if (cps.empty()) return 0;
  std::vector<std::string> symbols;
  symbols.reserve(cps.size());
  for (char32_t cp : cps) {
    symbols.push_back(text::encode_utf8(std::u32string_view(&cp, 1)));
  }
  while (symbols.size() > 1) {
    int best_rank = -1;
    size_t best_pos = 0;
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      const auto it = merge_rank_.find(symbols[i] + "\x1f" + symbols[i + 1]);
      if (it != merge_rank_.end() &&
          (best_rank < 0 || it->second < best_rank)) {
        best_rank = it->second;
        best_pos = i;
      }
    }
    if (best_rank < 0) break;
    symbols[best_pos] += symbols[best_pos + 1];
    symbols.erase(symbols.begin() + best_pos + 1);
  }
  return static_cast<int64_t>(symbols.size());
}

int64_t BpeTokenCounter::count_tokens(const std::string& text) {
  int64_t total = 0;
  for (const auto& word : text::split_ws(text)) {
    total += count_word(word);
  }
  return total;
}

struct RemoteTokenCounter::Impl {
  detail::HttpConfig http;
};

RemoteTokenCounter::RemoteTokenCounter(std::string base_url,
                                       std::string api_key, int timeout_sec,
                                       int max_retries)
    : impl_(new Impl{{std::move(base_url), std::move(api_key), timeout_sec,
                      max_retries}}) {}

RemoteTokenCounter::~RemoteTokenCounter() = default;

int64_t RemoteTokenCounter::count_tokens(const std::string& text) {
  const auto res =
      detail::post_json(impl_->http, "/tokenize", {{"text", text}});
  if (!res.is_object() || !res.contains("count") ||
      !res["count"].is_number_integer()) {
    throw TransportError("tokenize endpoint returned no integer 'count'");
  }
  return res["count"].get<int64_t>();
}

std::string RemoteTokenCounter::id() const {
  return "remote:" + impl_->http.base_url;
}

}  // namespace pivotmt
