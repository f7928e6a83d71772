#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pivotmt/config.hpp"
#include "pivotmt/corpus.hpp"
#include "pivotmt/llm.hpp"
#include "pivotmt/metrics.hpp"
#include "pivotmt/retrieval.hpp"
#include "pivotmt/stats.hpp"
#include "pivotmt/token_counter.hpp"

namespace pivotmt {

/// One scored hypothesis with its provenance back into the generation
/// cache (prompt hash).
struct SegmentOutcome {
  int64_t query_id = 0;
  std::string prompt_hash;
  std::string hypothesis;
  bool context_overflow = false;

  bool operator==(const SegmentOutcome&) const = default;
};

struct CellRow {
  int k = 0;
  Condition condition = Condition::kDirect;
  MetricReport report;
  int64_t n_generations = 0;
  int64_t n_errors = 0;
  int64_t n_context_overflows = 0;
  std::string error;  // non-empty when the whole cell failed

  bool operator==(const CellRow& o) const;
};

struct CellResult {
  CellRow row;
  std::vector<SegmentOutcome> segments;       // test order
  std::vector<BleuSegmentStats> bleu_stats;   // parallel to segments
  std::vector<ChrfSegmentStats> chrf_stats;

  bool operator==(const CellResult&) const;
};

struct ExperimentResult {
  std::string config_digest;
  std::string corpus_name;
  std::string model_id;
  std::string source_lang;
  std::string pivot_lang;
  std::string target_lang;
  Condition condition = Condition::kDirect;
  std::vector<CellResult> cells;

  bool operator==(const ExperimentResult&) const;

  const CellResult* find_cell(int k) const;
};

/// Holds the loaded corpus, datastore, backend and cache for one
/// experiment so ablation cells share setup. The datastore is loaded from
/// config.datastore_path when present, otherwise built (and saved there
/// when a path is configured).
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);
  ~Experiment();

  /// One (condition, k) cell: retrieve, prompt, generate, clean, score.
  /// Transport failures beyond the retry budget abort the cell (partial
  /// generations stay persisted in the cache); context-window rejections
  /// are recorded per segment and scored as empty hypotheses.
  CellResult run_cell(int k);

  /// One row per configured k; a failing cell records its error and the
  /// remaining rows continue. Results are persisted under out_dir.
  ExperimentResult run_ablation();

  const Corpus& corpus() const { return corpus_; }
  const Datastore& datastore() const { return store_; }
  const ExperimentConfig& config() const { return config_; }
  GenerationCache& cache() { return *cache_; }

 private:
  ExperimentConfig config_;
  Corpus corpus_;
  Datastore store_;
  std::unique_ptr<EmbeddingProvider> provider_;
  std::unique_ptr<GenerationBackend> backend_;
  std::unique_ptr<GenerationCache> cache_;
  std::vector<EmbeddingVector> test_embeddings_;
  LangLabels labels_;
};

/// Paired bootstrap between two persisted results at cells (k_a, k_b).
/// Both results must cover the same test set in the same order.
BootstrapReport compare_systems(const ExperimentResult& result_a,
                                const ExperimentResult& result_b, int k_a,
                                int k_b, BootstrapMetric metric, int64_t n,
                                uint64_t seed);

// ------------------------------------------------------------- analyses --

struct JaccardRow {
  std::string pair;        // e.g. "Eng-Mar"
  double similarity = 0.0;
  size_t vocab_a = 0;
  size_t vocab_b = 0;
};

/// Pairwise word-level Jaccard similarity between the corpus language
/// columns (train + test) under one normalization policy.
std::vector<JaccardRow> jaccard_table(const Corpus& corpus, NormPolicy policy);

struct FertilityRow {
  std::string dataset;
  std::string language;
  double fertility = 0.0;
};

/// Tokens-per-word for each language column of the corpus.
std::vector<FertilityRow> fertility_table(const Corpus& corpus,
                                          TokenCounter& counter);

struct DeviationRow {
  int k = 0;
  double chrf = 0.0;
};

/// Plain chrF between the test pivot translations and each cell's
/// hypotheses, by k.
std::vector<DeviationRow> deviation_table(const ExperimentResult& result,
                                          const Corpus& corpus);

}  // namespace pivotmt
