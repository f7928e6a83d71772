#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pivotmt {

using EmbeddingVector = std::vector<float>;

/// Sentence-embedding source. Implementations need not return normalized
/// vectors; embed_texts() L2-normalizes locally regardless.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// One raw vector per input, in input order.
  virtual std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts) = 0;

  virtual int dimension() const = 0;
  virtual std::string id() const = 0;
};

/// Deterministic hashed bag-of-words embedder (dimension 256): whitespace
/// tokens hashed to buckets, counts L2-normalized. Non-semantic; exists so
/// tests and CI run with no network.
class HashedBowProvider final : public EmbeddingProvider {
 public:
  static constexpr int kDimension = 256;

  std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts) override;
  int dimension() const override { return kDimension; }
  std::string id() const override { return "hashed-bow-256"; }

  /// Raw (unnormalized) counts for one text; exposed for tests.
  static EmbeddingVector raw_counts(const std::string& text);
};

/// POST {base_url}/v1/embeddings with {"model", "input": [...]};
/// reads {"data": [{"index", "embedding"}]}.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string base_url, std::string model,
                        std::string api_key = "", int timeout_sec = 60,
                        int max_retries = 3);
  ~HttpEmbeddingProvider() override;

  std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts) override;
  int dimension() const override;
  std::string id() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// In-place L2 normalization; throws ValidationError on zero/non-finite
/// input (normalized vectors must be unit length with finite entries).
void normalize_l2(EmbeddingVector& v);

/// Embeds texts through the provider in batches of `batch_size`, preserving
/// input order, and L2-normalizes every vector. Throws
/// DimensionMismatchError if the provider's dimension drifts mid-run and
/// TransportError/ValidationError on provider misbehavior.
std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         std::span<const std::string> texts,
                                         size_t batch_size = 32,
                                         int parallelism = 1);

}  // namespace pivotmt
