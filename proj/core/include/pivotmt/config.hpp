#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pivotmt/corpus.hpp"
#include "pivotmt/embedding.hpp"
#include "pivotmt/llm.hpp"
#include "pivotmt/prompt.hpp"

namespace pivotmt {

struct BackendSpec {
  std::string kind = "mock";  // live | mock | replay

  // live
  std::string base_url;  // defaults from PIVOTMT_BASE_URL
  std::string api_key;   // defaults from PIVOTMT_API_KEY
  int timeout_sec = 120;
  int max_retries = 3;
  int backoff_ms = 500;

  // replay
  std::string replay_fixture;

  // mock
  bool mock_perfect = false;       // echo the test target (oracle sanity runs)
  std::string mock_map_file;       // JSONL {"src": str, "out": str}
  size_t mock_max_prompt_chars = 0;
};

struct EmbeddingSpec {
  std::string provider = "hashed-bow";  // "hashed-bow" or "http"
  std::string base_url;
  std::string model;
  size_t batch_size = 32;
  int parallelism = 1;
  int timeout_sec = 60;
  int max_retries = 3;
};

struct ReferenceBaseline {
  std::string pair;
  double bleu = 0.0;
  double chrfpp = 0.0;

  bool operator==(const ReferenceBaseline&) const = default;
};

/// One declarative file configures a whole experiment; CLI flags override
/// individual fields.
struct ExperimentConfig {
  std::string corpus_path;
  CorpusDescriptor corpus;
  std::map<std::string, std::string> lang_labels;  // code -> display name

  std::string datastore_path;
  EmbeddingSpec embedding;

  BackendSpec backend;
  std::string model_id = "mock-model";
  Condition condition = Condition::kDirect;
  std::vector<int> k_values = {0, 1, 2, 3, 4, 5};
  SamplingParams sampling;
  CleaningPolicy cleaning = CleaningPolicy::kDefault;
  DemoOrder demo_order = DemoOrder::kMostSimilarFirst;
  std::string out_dir = "runs/default";
  uint64_t seed = 0;
  int generation_parallelism = 4;

  // External system scores shown in reports as labeled reference
  // constants, never computed here.
  std::vector<ReferenceBaseline> reference_baselines = {
      {"Eng-Gom", 7.51, 26.82},
      {"Eng-Aeb", 4.20, 10.42},
  };
};

/// Parses the JSON config file; keys mirror the struct fields. Unknown
/// keys are rejected to catch typos. Environment variables
/// PIVOTMT_BASE_URL / PIVOTMT_API_KEY fill empty endpoint fields.
ExperimentConfig load_config(const std::string& path);

ExperimentConfig config_from_json_string(const std::string& body);

std::string to_json_string(const ExperimentConfig& config);

/// SHA-256 of the canonical config serialization.
std::string config_digest(const ExperimentConfig& config);

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const ExperimentConfig& config);

/// Constructs the generation backend; mock_perfect wires the corpus test
/// targets into the mock's fixture map.
std::unique_ptr<GenerationBackend> make_backend(const ExperimentConfig& config,
                                                const Corpus& corpus);

}  // namespace pivotmt
