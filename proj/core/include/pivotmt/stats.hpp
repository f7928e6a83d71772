#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pivotmt/metrics.hpp"

namespace pivotmt {

enum class BootstrapMetric { kBleu, kChrfpp };

std::string to_string(BootstrapMetric metric);

struct BootstrapReport {
  BootstrapMetric metric = BootstrapMetric::kBleu;
  double delta_observed = 0.0;  // system A - system B on the full test set
  double p_value = 1.0;
  int64_t n_resamples = 0;
  uint64_t seed = 0;
  int64_t n_segments = 0;
  // one-sided hypothesis actually tested: "a_over_b", or "b_over_a" when
  // delta_observed < 0 swapped the roles
  std::string direction;
  // raw resample distribution (always A - B), persisted for inspection
  std::vector<double> deltas;
};

std::string to_json_string(const BootstrapReport& report);

/// Paired bootstrap over per-segment BLEU statistics: each of `n`
/// resamples draws m segment indices with replacement (the same indices
/// for both systems), scores both from summed statistics and records
/// delta. One-sided p with add-one smoothing: (#{delta_i <= 0} + 1)/(n+1)
/// for the hypothesis that the observed-better system wins. Deterministic
/// for a fixed seed; per-resample RNG streams are derived from
/// (seed, resample index).
BootstrapReport paired_bootstrap(std::span<const BleuSegmentStats> stats_a,
                                 std::span<const BleuSegmentStats> stats_b,
                                 int64_t n, uint64_t seed);

/// Same resampling over chrF statistics (both sides must share the order
/// configuration and beta).
BootstrapReport paired_bootstrap(std::span<const ChrfSegmentStats> stats_a,
                                 std::span<const ChrfSegmentStats> stats_b,
                                 int64_t n, uint64_t seed);

}  // namespace pivotmt
