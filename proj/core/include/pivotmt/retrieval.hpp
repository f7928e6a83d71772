#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pivotmt/corpus.hpp"
#include "pivotmt/embedding.hpp"

namespace pivotmt {

/// Flat vector index over the train split. Immutable after build; safe to
/// share across concurrent readers.
struct Datastore {
  std::string corpus_name;
  std::string provider_id;
  int dimension = 0;
  std::vector<int64_t> ids;               // triplet ids, build order
  std::vector<EmbeddingVector> vectors;   // parallel to ids, L2-normalized
  std::vector<Triplet> triplets;          // parallel to ids

  size_t size() const { return ids.size(); }

  /// Triplet lookup by id; throws ValidationError when absent.
  const Triplet& triplet_by_id(int64_t id) const;
};

struct RetrievalHit {
  int64_t triplet_id = 0;
  double similarity = 0.0;
};

struct RetrievalResult {
  std::vector<RetrievalHit> hits;  // similarity desc, ties by ascending id
};

/// Embeds the train-split sources only (test is never indexed).
Datastore build_index(const Corpus& corpus, EmbeddingProvider& provider,
                      size_t batch_size = 32, int parallelism = 1);

/// Exact top-k by cosine similarity (dot product on normalized vectors).
/// k is clamped to the store size; k == 0 yields an empty result. Throws
/// DimensionMismatchError when the query dimension differs from the store.
RetrievalResult retrieve_topk(const Datastore& store,
                              const EmbeddingVector& query, size_t k);

/// Line-JSON index file with a version header; save/load round-trips ids,
/// provider_id and dimension exactly and vectors bit-exactly.
void save_index(const Datastore& store, const std::string& path);

/// Throws ParseError on corrupt/truncated files (no partial datastore) and
/// ValidationError when `expected_provider_id` is set and differs.
Datastore load_index(const std::string& path,
                     const std::optional<std::string>& expected_provider_id =
                         std::nullopt);

}  // namespace pivotmt
