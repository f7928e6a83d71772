#include <algorithm>

#include "pivotmt/errors.hpp"
#include "pivotmt/metrics.hpp"
#include "pivotmt/text.hpp"
#include "pivotmt/token_counter.hpp"

namespace pivotmt {

double jaccard_similarity(const Vocabulary& a, const Vocabulary& b) {
  if (a.policy != b.policy) {
    throw ValidationError("jaccard_similarity: vocabularies use different "
                          "normalization policies (" +
                          to_string(a.policy) + " vs " + to_string(b.policy) +
                          ")");
  }
  if (a.words.empty() && b.words.empty()) return 0.0;
  size_t intersection = 0;
  for (const auto& w : a.words) {
    if (b.words.count(w)) ++intersection;
  }
  const size_t uni = a.words.size() + b.words.size() - intersection;
  return static_cast<double>(intersection) / static_cast<double>(uni);
}

double token_fertility(std::span<const std::string> texts,
                       TokenCounter& counter) {
  int64_t tokens = 0;
  int64_t words = 0;
  for (const auto& t : texts) {
    const int64_t c = counter.count_tokens(t);
    if (c < 0) {
      throw ValidationError("token counter '" + counter.id() +
                            "' returned a negative count");
    }
    tokens += c;
    words += static_cast<int64_t>(text::split_ws(t).size());
  }
  if (words == 0) {
    throw ValidationError("token_fertility: corpus contains no words");
  }
  return static_cast<double>(tokens) / static_cast<double>(words);
}

ScoredCorpus score_corpus(std::span<const std::string> hyps,
                          std::span<const std::string> refs) {
  ScoredCorpus out;
  auto [bleu_score, bleu_stats] = corpus_bleu(hyps, refs);
  auto [chrf_score, chrf_stats] = chrf(hyps, refs, 6, 2, 2.0);
  out.report.bleu = bleu_score;
  out.report.chrfpp = chrf_score;
  out.report.bleu_sig = bleu_signature();
  out.report.chrf_sig = chrf_signature(6, 2);
  out.report.n_segments = static_cast<int64_t>(hyps.size());
  out.report.n_empty_hyps = static_cast<int64_t>(
      std::count_if(hyps.begin(), hyps.end(), [](const std::string& h) {
        return text::strip(h).empty();
      }));
  out.bleu_stats = std::move(bleu_stats);
  out.chrf_stats = std::move(chrf_stats);
  return out;
}

}  // namespace pivotmt
