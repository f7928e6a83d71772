#include <benchmark/benchmark.h>

#include <random>

#include "pivotmt/metrics.hpp"
#include "pivotmt/stats.hpp"

using namespace pivotmt;

namespace {

// Bootstrap cost is dominated by summing segment statistics; build a
// corpus of the paper's test-set scale.
std::pair<std::vector<BleuSegmentStats>, std::vector<ChrfSegmentStats>>
make_stats(size_t n) {
  static const std::vector<std::string> words = {
      "the", "a", "cat", "dog", "runs", "sleeps", "here", "there", "now"};
  std::mt19937_64 rng(17);
  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  for (size_t i = 0; i < n; ++i) {
    std::string h;
    std::string r;
    const size_t len = 8 + rng() % 12;
    for (size_t w = 0; w < len; ++w) {
      if (w > 0) {
        h += " ";
        r += " ";
      }
      r += words[rng() % words.size()];
      h += (rng() % 4 == 0) ? words[rng() % words.size()]
                            : r.substr(r.rfind(' ') + 1);
    }
    hyps.push_back(h);
    refs.push_back(r);
  }
  return {corpus_bleu(hyps, refs).second, chrf(hyps, refs).second};
}

}  // namespace

static void BM_PairedBootstrapBleu(benchmark::State& state) {
  const auto [bleu_stats, chrf_stats] = make_stats(200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        paired_bootstrap(bleu_stats, bleu_stats,
                         static_cast<int64_t>(state.range(0)), 42));
  }
}
BENCHMARK(BM_PairedBootstrapBleu)->Arg(1000)->Arg(10000);

static void BM_PairedBootstrapChrf(benchmark::State& state) {
  const auto [bleu_stats, chrf_stats] = make_stats(200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        paired_bootstrap(chrf_stats, chrf_stats,
                         static_cast<int64_t>(state.range(0)), 42));
  }
}
BENCHMARK(BM_PairedBootstrapChrf)->Arg(1000)->Arg(10000);
