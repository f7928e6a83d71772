#include <benchmark/benchmark.h>

#include <random>

#include "pivotmt/metrics.hpp"

using namespace pivotmt;

namespace {

std::vector<std::string> sentences(size_t n, uint64_t seed) {
  static const std::vector<std::string> words = {
      "the",  "quick", "brown", "fox",   "jumps", "over", "lazy",
      "dog",  "river", "3.14",  "hello", "world", "a",    "of",
      "नमस्ते", "शब्द",  "okay,", "done."};
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) {
    std::string s;
    const size_t len = 6 + rng() % 18;
    for (size_t w = 0; w < len; ++w) {
      if (w > 0) s += " ";
      s += words[rng() % words.size()];
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

static void BM_Tokenize13a(benchmark::State& state) {
  const auto texts = sentences(200, 3);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tokenize_13a(texts[i++ % texts.size()]));
  }
}
BENCHMARK(BM_Tokenize13a);

static void BM_CorpusBleu(benchmark::State& state) {
  const auto hyps = sentences(static_cast<size_t>(state.range(0)), 5);
  const auto refs = sentences(static_cast<size_t>(state.range(0)), 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(corpus_bleu(hyps, refs));
  }
}
BENCHMARK(BM_CorpusBleu)->Arg(200)->Arg(1000);

static void BM_CorpusChrfpp(benchmark::State& state) {
  const auto hyps = sentences(static_cast<size_t>(state.range(0)), 7);
  const auto refs = sentences(static_cast<size_t>(state.range(0)), 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chrf(hyps, refs));
  }
}
BENCHMARK(BM_CorpusChrfpp)->Arg(200)->Arg(1000);
