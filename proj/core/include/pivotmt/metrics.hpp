#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pivotmt/corpus.hpp"

namespace pivotmt {

class TokenCounter;

// ------------------------------------------------------------------ 13a --

/// mteval-v13a tokenization: entity unescape (&quot; &amp; &lt; &gt;),
/// <skipped> removal, hyphen-linebreak joining, newline-to-space; then
/// general punctuation padded with spaces, `.`/`,` padded unless digit
/// adjacent on the relevant side, `-` padded when digit-preceded; finally
/// split on whitespace.
std::vector<std::string> tokenize_13a(std::string_view line);

// ----------------------------------------------------------------- BLEU --

/// Per-segment sufficient statistics for corpus BLEU; index i holds the
/// (i+1)-gram counts.
struct BleuSegmentStats {
  std::array<int64_t, 4> match_counts{};
  std::array<int64_t, 4> total_counts{};
  int64_t hyp_len = 0;
  int64_t ref_len = 0;
};

/// Elementwise sums over a set of segments.
struct BleuCorpusSums {
  std::array<int64_t, 4> match_counts{};
  std::array<int64_t, 4> total_counts{};
  int64_t hyp_len = 0;
  int64_t ref_len = 0;

  void add(const BleuSegmentStats& s);
};

/// Statistics for one (hypothesis, reference) pair. Segments are
/// right-stripped before 13a tokenization, as the reference scorer does
/// inside its BLEU preprocessing.
BleuSegmentStats bleu_segment_stats(std::string_view hyp, std::string_view ref);

/// Corpus BLEU on the 0-100 scale from summed statistics: precisions with
/// mteval exponential smoothing (the smoothing factor starts at 1 and
/// doubles at each zero-match order), geometric mean over all four orders,
/// times the brevity penalty min(1, exp(1 - ref_len/hyp_len)); 0 when the
/// hypothesis side is empty.
double bleu_from_sums(const BleuCorpusSums& sums);

/// Signature "nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp|version:...".
std::string bleu_signature();

std::pair<double, std::vector<BleuSegmentStats>> corpus_bleu(
    std::span<const std::string> hyps, std::span<const std::string> refs);

// ----------------------------------------------------------------- chrF --

struct ChrfStatTriple {
  int64_t hyp_ngrams = 0;
  int64_t ref_ngrams = 0;
  int64_t matched = 0;
};

/// Per-segment chrF statistics: char orders 1..char_order followed by word
/// orders 1..word_order. chrF++ is (6, 2, beta 2); plain chrF is (6, 0, 2).
struct ChrfSegmentStats {
  std::vector<ChrfStatTriple> orders;
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
};

ChrfSegmentStats chrf_segment_stats(std::string_view hyp, std::string_view ref,
                                    int char_order = 6, int word_order = 2,
                                    double beta = 2.0);

/// Corpus chrF on the 0-100 scale from summed per-order statistics.
/// Precision and recall are averaged over effective orders (orders where
/// either side has n-grams); an order with n-grams on one side only
/// contributes an epsilon for the empty side. F_beta of the averages.
double chrf_from_sums(std::span<const ChrfStatTriple> sums, double beta);

/// Signature "nrefs:1|case:mixed|eff:yes|nc:{nc}|nw:{nw}|space:no|version:...".
std::string chrf_signature(int char_order, int word_order);

std::pair<double, std::vector<ChrfSegmentStats>> chrf(
    std::span<const std::string> hyps, std::span<const std::string> refs,
    int char_order = 6, int word_order = 2, double beta = 2.0);

/// chrF++'s word tokenization: whitespace split, then one leading or
/// trailing ASCII punctuation character is separated off (trailing wins).
std::vector<std::string> chrf_word_tokens(std::string_view sent);

// ------------------------------------------------------------- analyses --

/// |A∩B| / |A∪B|; 0 when both vocabularies are empty. Throws
/// ValidationError when the two policies differ.
double jaccard_similarity(const Vocabulary& a, const Vocabulary& b);

/// (total subword tokens) / (total whitespace words) over the corpus.
/// Throws ValidationError when the corpus has no words.
double token_fertility(std::span<const std::string> texts,
                       TokenCounter& counter);

/// Plain chrF (nc=6, nw=0, beta=2) with pivots as references.
std::pair<double, std::vector<ChrfSegmentStats>> pivot_deviation(
    std::span<const std::string> pivots, std::span<const std::string> hyps);

// --------------------------------------------------------------- report --

struct MetricReport {
  double bleu = 0.0;
  double chrfpp = 0.0;
  std::string bleu_sig;
  std::string chrf_sig;
  int64_t n_segments = 0;
  int64_t n_empty_hyps = 0;
};

struct ScoredCorpus {
  MetricReport report;
  std::vector<BleuSegmentStats> bleu_stats;
  std::vector<ChrfSegmentStats> chrf_stats;
};

/// BLEU + chrF++ over one hypothesis set, with the per-segment statistics
/// kept for bootstrap resampling.
ScoredCorpus score_corpus(std::span<const std::string> hyps,
                          std::span<const std::string> refs);

}  // namespace pivotmt
