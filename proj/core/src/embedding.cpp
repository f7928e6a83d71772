#include "pivotmt/embedding.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "http_client.hpp"
#include "pivotmt/errors.hpp"
#include "pivotmt/text.hpp"

namespace pivotmt {

namespace {

// FNV-1a, 64-bit
uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

EmbeddingVector HashedBowProvider::raw_counts(const std::string& text) {
  EmbeddingVector v(kDimension, 0.0f);
  const auto tokens = text::split_ws(text);
  if (tokens.empty()) {
    v[0] = 1.0f;  // whitespace-only text still gets a unit-normalizable vector
    return v;
  }
  for (const auto& tok : tokens) {
    v[fnv1a(tok) % kDimension] += 1.0f;
  }
  return v;
}

std::vector<EmbeddingVector> HashedBowProvider::embed_batch(
    std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(raw_counts(t));
  return out;
}

struct HttpEmbeddingProvider::Impl {
  detail::HttpConfig http;
  std::string model;
  mutable std::atomic<int> dimension{0};  // learned from the first response
};

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url,
                                             std::string model,
                                             std::string api_key,
                                             int timeout_sec, int max_retries)
    : impl_(new Impl{{std::move(base_url), std::move(api_key), timeout_sec,
                      max_retries},
                     std::move(model)}) {}

HttpEmbeddingProvider::~HttpEmbeddingProvider() = default;

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) {
  nlohmann::json input = nlohmann::json::array();
  for (const auto& t : texts) input.push_back(t);
  const auto res = detail::post_json(
      impl_->http, "/v1/embeddings",
      {{"model", impl_->model}, {"input", std::move(input)}});
  if (!res.is_object() || !res.contains("data") || !res["data"].is_array()) {
    throw TransportError("embeddings endpoint returned no 'data' array");
  }
  const auto& data = res["data"];
  if (data.size() != texts.size()) {
    throw ValidationError(
        "embeddings endpoint returned wrong count: expected " +
        std::to_string(texts.size()) + ", got " + std::to_string(data.size()));
  }
  std::vector<EmbeddingVector> out(texts.size());
  for (const auto& item : data) {
    if (!item.contains("index") || !item.contains("embedding")) {
      throw TransportError("embeddings item missing index/embedding");
    }
    const auto idx = item["index"].get<size_t>();
    if (idx >= out.size()) {
      throw ValidationError("embeddings item index out of range: " +
                            std::to_string(idx));
    }
    out[idx] = item["embedding"].get<EmbeddingVector>();
  }
  const int dim = impl_->dimension.load();
  if (dim == 0 && !out.empty()) {
    impl_->dimension.store(static_cast<int>(out[0].size()));
  }
  return out;
}

int HttpEmbeddingProvider::dimension() const { return impl_->dimension.load(); }

std::string HttpEmbeddingProvider::id() const { return impl_->model; }

void normalize_l2(EmbeddingVector& v) {
  double sum = 0.0;
  for (float x : v) {
    if (!std::isfinite(x)) {
      throw ValidationError("embedding contains a non-finite entry");
    }
    sum += static_cast<double>(x) * static_cast<double>(x);
  }
  if (sum <= 0.0) {
    throw ValidationError("cannot L2-normalize a zero vector");
  }
  const float inv = static_cast<float>(1.0 / std::sqrt(sum));
  for (float& x : v) x *= inv;
}

std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         std::span<const std::string> texts,
                                         size_t batch_size,
                                         int parallelism) {
  if (batch_size == 0) batch_size = 1;
  const size_t n = texts.size();
  std::vector<EmbeddingVector> out(n);

  const size_t n_batches = (n + batch_size - 1) / batch_size;
  std::atomic<size_t> next_batch{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const size_t b = next_batch.fetch_add(1);
      if (b >= n_batches) return;
      const size_t begin = b * batch_size;
      const size_t count = std::min(batch_size, n - begin);
      try {
        auto vecs = provider.embed_batch(texts.subspan(begin, count));
        if (vecs.size() != count) {
          throw ValidationError("provider returned wrong vector count");
        }
        for (size_t i = 0; i < count; ++i) {
          normalize_l2(vecs[i]);
          out[begin + i] = std::move(vecs[i]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next_batch.store(n_batches);  // stop other workers
        return;
      }
    }
  };

  if (parallelism <= 1 || n_batches <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    const size_t n_threads =
        std::min<size_t>(static_cast<size_t>(parallelism), n_batches);
    threads.reserve(n_threads);
    for (size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // dimension consistency across the whole run
  for (size_t i = 1; i < n; ++i) {
    if (out[i].size() != out[0].size()) {
      throw DimensionMismatchError(
          "provider dimension changed mid-run: " +
          std::to_string(out[0].size()) + " vs " + std::to_string(out[i].size()) +
          " at index " + std::to_string(i));
    }
  }
  return out;
}

}  // namespace pivotmt
