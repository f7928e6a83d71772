#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pivotmt/prompt.hpp"

namespace pivotmt {

struct SamplingParams {
  double temperature = 0.1;
  int max_new_tokens = 200;
  int num_return_sequences = 1;
  bool do_sample = true;
  std::optional<int64_t> seed;  // forwarded when the endpoint supports it
};

enum class CleaningPolicy { kNone, kDefault, kFirstLine };

std::string to_string(CleaningPolicy policy);
CleaningPolicy cleaning_policy_from_string(const std::string& name);

/// Deterministic response cleanup. The default policy truncates at the
/// first `<|im_end|>`, trims surrounding whitespace, then truncates at the
/// first blank line; `first_line` keeps only the first line; `none` is the
/// identity. Idempotent; never longer than the input.
std::string clean_hypothesis(std::string_view raw, CleaningPolicy policy);

/// Content digest over (rendered prompt, sampling params, model id);
/// stable across runs for identical inputs.
std::string prompt_hash(const std::string& rendered_prompt,
                        const SamplingParams& params,
                        const std::string& model_id);

struct GenerationRecord {
  int64_t query_id = 0;
  std::string model_id;
  std::string prompt_hash;
  std::string raw_output;
  std::string hypothesis;
  std::string backend;   // live | mock | replay
  std::string timestamp; // ISO-8601 UTC; not covered by equality in tests

  bool operator==(const GenerationRecord&) const = default;
};

std::string to_json_line(const GenerationRecord& record);
GenerationRecord generation_record_from_json(const std::string& line);

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;

  virtual std::string generate_raw(const PromptBundle& bundle,
                                   const SamplingParams& params,
                                   const std::string& model_id) = 0;
  virtual std::string kind() const = 0;
};

/// Pure function of the bundle: returns the mapped output when the query
/// source is in the fixture map, otherwise a digest-derived string. A
/// non-zero `max_prompt_chars` makes over-length prompts raise
/// ContextOverflowError, mirroring a small context window.
class MockBackend final : public GenerationBackend {
 public:
  explicit MockBackend(
      std::unordered_map<std::string, std::string> source_to_output = {},
      size_t max_prompt_chars = 0);

  std::string generate_raw(const PromptBundle& bundle,
                           const SamplingParams& params,
                           const std::string& model_id) override;
  std::string kind() const override { return "mock"; }

 private:
  std::unordered_map<std::string, std::string> source_to_output_;
  size_t max_prompt_chars_ = 0;
};

/// Replays recorded outputs keyed by prompt hash from a line-JSON fixture
/// file ({"prompt_hash": str, "raw_output": str}). Unknown hashes raise
/// ReplayMissError.
class ReplayBackend final : public GenerationBackend {
 public:
  explicit ReplayBackend(const std::string& fixture_path);

  std::string generate_raw(const PromptBundle& bundle,
                           const SamplingParams& params,
                           const std::string& model_id) override;
  std::string kind() const override { return "replay"; }

  size_t size() const { return outputs_.size(); }

 private:
  std::unordered_map<std::string, std::string> outputs_;
};

struct LiveEndpointConfig {
  std::string base_url;
  std::string api_key;
  int timeout_sec = 120;
  int max_retries = 3;
  int backoff_ms = 500;
};

/// POST {base_url}/v1/chat/completions with the structured messages;
/// reads choices[0].message.content.
class LiveBackend final : public GenerationBackend {
 public:
  explicit LiveBackend(LiveEndpointConfig config);
  ~LiveBackend() override;

  std::string generate_raw(const PromptBundle& bundle,
                           const SamplingParams& params,
                           const std::string& model_id) override;
  std::string kind() const override { return "live"; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs one generation and assembles the record (hash, raw output, cleaned
/// hypothesis, timestamp). Validates the sampling invariants.
GenerationRecord generate(GenerationBackend& backend,
                          const PromptBundle& bundle,
                          const SamplingParams& params,
                          const std::string& model_id,
                          CleaningPolicy policy = CleaningPolicy::kDefault);

/// Append-only per-run-directory generation cache, keyed solely by prompt
/// hash. Safe under concurrent readers; writers are serialized.
class GenerationCache {
 public:
  /// Backed by `<run_dir>/generations.jsonl`; loads existing records.
  explicit GenerationCache(const std::string& run_dir);

  std::optional<GenerationRecord> get(const std::string& prompt_hash) const;
  void put(const GenerationRecord& record);
  size_t size() const;
  const std::string& file_path() const { return file_path_; }

 private:
  struct State;
  std::shared_ptr<State> state_;
  std::string file_path_;
};

enum class GenerationErrorKind { kNone, kContextOverflow, kTransport };

struct GenerationOutcome {
  std::optional<GenerationRecord> record;
  GenerationErrorKind error_kind = GenerationErrorKind::kNone;
  std::string error;
  bool from_cache = false;
};

/// Generates for every bundle with a bounded worker pool, consulting and
/// filling `cache` when provided. Outcome order matches bundle order.
std::vector<GenerationOutcome> generate_all(
    GenerationBackend& backend, std::span<const PromptBundle> bundles,
    const SamplingParams& params, const std::string& model_id,
    CleaningPolicy policy, GenerationCache* cache, int parallelism = 4);

}  // namespace pivotmt
