#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace pivotmt {

/// Counts subword tokens for fertility analysis. Model tokenizers are
/// usually only reachable as services, so this is an interface.
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual int64_t count_tokens(const std::string& text) = 0;
  virtual std::string id() const = 0;
};

/// Whitespace words = tokens; fertility is exactly 1.0. For tests.
class WhitespaceTokenCounter final : public TokenCounter {
 public:
  int64_t count_tokens(const std::string& text) override;
  std::string id() const override { return "whitespace"; }
};

/// Greedy pair-merge BPE over a merges file ("a b" per line, priority by
/// position; '#'-prefixed lines and a leading "#version" header ignored).
/// Words are whitespace-split; symbols start as single code points.
class BpeTokenCounter final : public TokenCounter {
 public:
  explicit BpeTokenCounter(const std::string& merges_path);

  int64_t count_tokens(const std::string& text) override;
  std::string id() const override { return id_; }

  /// Token count for one whitespace-free word.
  int64_t count_word(const std::string& word) const;

 private:
  std::unordered_map<std::string, int> merge_rank_;
  std::string id_;
};

/// POST {base_url}/tokenize with {"text": str}, expects {"count": int}.
class RemoteTokenCounter final : public TokenCounter {
 public:
  RemoteTokenCounter(std::string base_url, std::string api_key = "",
                     int timeout_sec = 30, int max_retries = 3);
  ~RemoteTokenCounter() override;

  int64_t count_tokens(const std::string& text) override;
  std::string id() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pivotmt
