#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "pivotmt/errors.hpp"
#include "pivotmt/metrics.hpp"
#include "pivotmt/text.hpp"
#include "pivotmt/version.hpp"

namespace pivotmt {

namespace {

constexpr int kMaxOrder = 4;

// Tokens contain no whitespace, so a space join is an injective n-gram key.
std::unordered_map<std::string, int64_t> word_ngrams(
    const std::vector<std::string>& tokens, int n) {
  std::unordered_map<std::string, int64_t> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key.push_back(' ');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

double floored_log(double x) {
  if (x == 0.0) return -9999999999.0;
  return std::log(x);
}

}  // namespace

void BleuCorpusSums::add(const BleuSegmentStats& s) {
  for (int n = 0; n < kMaxOrder; ++n) {
    match_counts[n] += s.match_counts[n];
    total_counts[n] += s.total_counts[n];
  }
  hyp_len += s.hyp_len;
  ref_len += s.ref_len;
}

BleuSegmentStats bleu_segment_stats(std::string_view hyp, std::string_view ref) {
  const auto hyp_tokens = tokenize_13a(text::rstrip(hyp));
  const auto ref_tokens = tokenize_13a(text::rstrip(ref));

  BleuSegmentStats stats;
  stats.hyp_len = static_cast<int64_t>(hyp_tokens.size());
  stats.ref_len = static_cast<int64_t>(ref_tokens.size());
  for (int n = 1; n <= kMaxOrder; ++n) {
    const auto hyp_counts = word_ngrams(hyp_tokens, n);
    const auto ref_counts = word_ngrams(ref_tokens, n);
    for (const auto& [ngram, cnt] : hyp_counts) {
      stats.total_counts[n - 1] += cnt;
      const auto it = ref_counts.find(ngram);
      if (it != ref_counts.end()) {
        stats.match_counts[n - 1] += std::min(cnt, it->second);
      }
    }
  }
  return stats;
}

double bleu_from_sums(const BleuCorpusSums& sums) {
  double precisions[kMaxOrder] = {0.0, 0.0, 0.0, 0.0};
  double smooth = 1.0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (sums.total_counts[n] == 0) break;
    if (sums.match_counts[n] == 0) {
      smooth *= 2.0;
      precisions[n] = 100.0 / (smooth * static_cast<double>(sums.total_counts[n]));
    } else {
      precisions[n] = 100.0 * static_cast<double>(sums.match_counts[n]) /
                      static_cast<double>(sums.total_counts[n]);
    }
  }
  double bp = 1.0;
  if (sums.hyp_len < sums.ref_len) {
    bp = sums.hyp_len > 0 ? std::exp(1.0 - static_cast<double>(sums.ref_len) /
                                               static_cast<double>(sums.hyp_len))
                          : 0.0;
  }
  double log_sum = 0.0;
  for (double p : precisions) log_sum += floored_log(p);
  return bp * std::exp(log_sum / kMaxOrder);
}

std::string bleu_signature() {
  return std::string("nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp|version:") +
         kSignatureVersion;
}

std::pair<double, std::vector<BleuSegmentStats>> corpus_bleu(
    std::span<const std::string> hyps, std::span<const std::string> refs) {
  if (hyps.size() != refs.size()) {
    throw ValidationError("corpus_bleu: hypothesis/reference count mismatch (" +
                          std::to_string(hyps.size()) + " vs " +
                          std::to_string(refs.size()) + ")");
  }
  if (hyps.empty()) throw ValidationError("corpus_bleu: empty corpus");

  std::vector<BleuSegmentStats> stats;
  stats.reserve(hyps.size());
  BleuCorpusSums sums;
  for (size_t i = 0; i < hyps.size(); ++i) {
    stats.push_back(bleu_segment_stats(hyps[i], refs[i]));
    sums.add(stats.back());
  }
  return {bleu_from_sums(sums), std::move(stats)};
}

}  // namespace pivotmt
