#include "pivotmt/stats.hpp"

#include <random>

#include <nlohmann/json.hpp>

#include "pivotmt/errors.hpp"

namespace pivotmt {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t bounded_rand(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Shared skeleton: ScoreFn maps an index vector to (score_a - score_b).
template <typename ScoreFn>
BootstrapReport run_bootstrap(size_t m, int64_t n, uint64_t seed,
                              BootstrapMetric metric, ScoreFn&& delta_of) {
  if (n < 1) throw ValidationError("paired_bootstrap: n must be >= 1");
  if (m < 1) throw ValidationError("paired_bootstrap: empty segment lists");

  BootstrapReport report;
  report.metric = metric;
  report.n_resamples = n;
  report.seed = seed;
  report.n_segments = static_cast<int64_t>(m);

  std::vector<size_t> identity(m);
  for (size_t i = 0; i < m; ++i) identity[i] = i;
  report.delta_observed = delta_of(identity);
  const bool swapped = report.delta_observed < 0.0;
  report.direction = swapped ? "b_over_a" : "a_over_b";

  report.deltas.reserve(n);
  int64_t count_not_better = 0;
  std::vector<size_t> indices(m);
  for (int64_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<uint64_t>(i))));
    for (size_t j = 0; j < m; ++j) indices[j] = bounded_rand(rng, m);
    const double delta = delta_of(indices);
    report.deltas.push_back(delta);
    const double oriented = swapped ? -delta : delta;
    if (oriented <= 0.0) ++count_not_better;
  }
  report.p_value = static_cast<double>(count_not_better + 1) /
                   static_cast<double>(n + 1);
  return report;
}

}  // namespace

std::string to_string(BootstrapMetric metric) {
  return metric == BootstrapMetric::kBleu ? "bleu" : "chrfpp";
}

std::string to_json_string(const BootstrapReport& report) {
  nlohmann::json j;
  j["metric"] = to_string(report.metric);
  j["delta_observed"] = report.delta_observed;
  j["p_value"] = report.p_value;
  j["n_resamples"] = report.n_resamples;
  j["seed"] = report.seed;
  j["n_segments"] = report.n_segments;
  j["direction"] = report.direction;
  j["deltas"] = report.deltas;
  return j.dump(2);
}

BootstrapReport paired_bootstrap(std::span<const BleuSegmentStats> stats_a,
                                 std::span<const BleuSegmentStats> stats_b,
                                 int64_t n, uint64_t seed) {
  if (stats_a.size() != stats_b.size()) {
    throw ValidationError("paired_bootstrap: statistic lists differ in length");
  }
  const auto delta_of = [&](const std::vector<size_t>& indices) {
    BleuCorpusSums sums_a;
    BleuCorpusSums sums_b;
    for (size_t idx : indices) {
      sums_a.add(stats_a[idx]);
      sums_b.add(stats_b[idx]);
    }
    return bleu_from_sums(sums_a) - bleu_from_sums(sums_b);
  };
  return run_bootstrap(stats_a.size(), n, seed, BootstrapMetric::kBleu,
                       delta_of);
}

BootstrapReport paired_bootstrap(std::span<const ChrfSegmentStats> stats_a,
                                 std::span<const ChrfSegmentStats> stats_b,
                                 int64_t n, uint64_t seed) {
  if (stats_a.size() != stats_b.size()) {
    throw ValidationError("paired_bootstrap: statistic lists differ in length");
  }
  if (stats_a.empty()) {
    throw ValidationError("paired_bootstrap: empty segment lists");
  }
  const size_t n_orders = stats_a[0].orders.size();
  const double beta = stats_a[0].beta;
  for (const auto* side : {&stats_a, &stats_b}) {
    for (const auto& s : *side) {
      if (s.orders.size() != n_orders || s.beta != beta) {
        throw ValidationError(
            "paired_bootstrap: inconsistent chrF configuration across "
            "segments");
      }
    }
  }
  const auto delta_of = [&](const std::vector<size_t>& indices) {
    std::vector<ChrfStatTriple> sums_a(n_orders);
    std::vector<ChrfStatTriple> sums_b(n_orders);
    for (size_t idx : indices) {
      for (size_t k = 0; k < n_orders; ++k) {
        sums_a[k].hyp_ngrams += stats_a[idx].orders[k].hyp_ngrams;
        sums_a[k].ref_ngrams += stats_a[idx].orders[k].ref_ngrams;
        sums_a[k].matched += stats_a[idx].orders[k].matched;
        sums_b[k].hyp_ngrams += stats_b[idx].orders[k].hyp_ngrams;
        sums_b[k].ref_ngrams += stats_b[idx].orders[k].ref_ngrams;
        sums_b[k].matched += stats_b[idx].orders[k].matched;
      }
    }
    return chrf_from_sums(sums_a, beta) - chrf_from_sums(sums_b, beta);
  };
  return run_bootstrap(stats_a.size(), n, seed, BootstrapMetric::kChrfpp,
                       delta_of);
}

}  // namespace pivotmt
