#include <string>
#include <unordered_map>
#include <vector>

#include "pivotmt/errors.hpp"
#include "pivotmt/metrics.hpp"
#include "pivotmt/text.hpp"
#include "pivotmt/version.hpp"

namespace pivotmt {

namespace {

// ASCII punctuation, matching Python's string.punctuation.
bool is_ascii_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
         (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
}

ChrfStatTriple count_ngrams(
    const std::unordered_map<std::u32string, int64_t>& hyp,
    const std::unordered_map<std::u32string, int64_t>& ref) {
  ChrfStatTriple t;
  for (const auto& [g, c] : hyp) {
    t.hyp_ngrams += c;
    const auto it = ref.find(g);
    if (it != ref.end()) t.matched += std::min(c, it->second);
  }
  for (const auto& [g, c] : ref) t.ref_ngrams += c;
  return t;
}

std::unordered_map<std::u32string, int64_t> char_ngram_counts(
    const std::u32string& s, int n) {
  std::unordered_map<std::u32string, int64_t> counts;
  if (static_cast<int>(s.size()) < n) return counts;
  for (size_t i = 0; i + n <= s.size(); ++i) {
    ++counts[s.substr(i, n)];
  }
  return counts;
}

std::unordered_map<std::u32string, int64_t> word_ngram_counts(
    const std::vector<std::string>& words, int n) {
  std::unordered_map<std::u32string, int64_t> counts;
  if (static_cast<int>(words.size()) < n) return counts;
  for (size_t i = 0; i + n <= words.size(); ++i) {
    std::string key = words[i];
    for (int k = 1; k < n; ++k) {
      key.push_back(' ');
      key += words[i + k];
    }
    ++counts[text::decode_utf8(key)];
  }
  return counts;
}

}  // namespace

std::vector<std::string> chrf_word_tokens(std::string_view sent) {
  std::vector<std::string> out;
  for (const auto& w : text::split_ws(sent)) {
    const std::u32string cps = text::decode_utf8(w);
    if (cps.size() <= 1) {
      out.push_back(w);
    } else if (is_ascii_punct(cps.back())) {
      out.push_back(text::encode_utf8(
          std::u32string_view(cps).substr(0, cps.size() - 1)));
      out.push_back(text::encode_utf8(std::u32string_view(&cps.back(), 1)));
    } else if (is_ascii_punct(cps.front())) {
      out.push_back(text::encode_utf8(std::u32string_view(&cps.front(), 1)));
      out.push_back(text::encode_utf8(std::u32string_view(cps).substr(1)));
    } else {
      out.push_back(w);
    }
  }
  return out;
}

ChrfSegmentStats chrf_segment_stats(std::string_view hyp, std::string_view ref,
                                    int char_order, int word_order,
                                    double beta) {
  ChrfSegmentStats stats;
  stats.char_order = char_order;
  stats.word_order = word_order;
  stats.beta = beta;
  stats.orders.reserve(char_order + word_order);

  // space:no -- char n-grams see the text with all whitespace removed
  const std::u32string h = text::decode_utf8(text::remove_ws(hyp));
  const std::u32string r = text::decode_utf8(text::remove_ws(ref));
  for (int n = 1; n <= char_order; ++n) {
    stats.orders.push_back(
        count_ngrams(char_ngram_counts(h, n), char_ngram_counts(r, n)));
  }
  if (word_order > 0) {
    const auto hw = chrf_word_tokens(hyp);
    const auto rw = chrf_word_tokens(ref);
    for (int n = 1; n <= word_order; ++n) {
      stats.orders.push_back(
          count_ngrams(word_ngram_counts(hw, n), word_ngram_counts(rw, n)));
    }
  }
  return stats;
}

double chrf_from_sums(std::span<const ChrfStatTriple> sums, double beta) {
  constexpr double kEps = 1e-16;
  const double factor = beta * beta;
  double avg_prec = 0.0;
  double avg_rec = 0.0;
  int effective_order = 0;
  for (const auto& t : sums) {
    const double prec =
        t.hyp_ngrams > 0
            ? static_cast<double>(t.matched) / static_cast<double>(t.hyp_ngrams)
            : kEps;
    const double rec =
        t.ref_ngrams > 0
            ? static_cast<double>(t.matched) / static_cast<double>(t.ref_ngrams)
            : kEps;
    if (t.hyp_ngrams > 0 || t.ref_ngrams > 0) {
      avg_prec += prec;
      avg_rec += rec;
      ++effective_order;
    }
  }
  if (effective_order == 0) return 0.0;
  avg_prec /= effective_order;
  avg_rec /= effective_order;
  if (avg_prec + avg_rec == 0.0) return 0.0;
  return 100.0 * (1.0 + factor) * avg_prec * avg_rec /
         (factor * avg_prec + avg_rec);
}

std::string chrf_signature(int char_order, int word_order) {
  return "nrefs:1|case:mixed|eff:yes|nc:" + std::to_string(char_order) +
         "|nw:" + std::to_string(word_order) +
         "|space:no|version:" + kSignatureVersion;
}

std::pair<double, std::vector<ChrfSegmentStats>> chrf(
    std::span<const std::string> hyps, std::span<const std::string> refs,
    int char_order, int word_order, double beta) {
  if (hyps.size() != refs.size()) {
    throw ValidationError("chrf: hypothesis/reference count mismatch (" +
                          std::to_string(hyps.size()) + " vs " +
                          std::to_string(refs.size()) + ")");
  }
  if (hyps.empty()) throw ValidationError("chrf: empty corpus");
  if (char_order < 1 || word_order < 0 || beta <= 0.0) {
    throw ValidationError("chrf: invalid parameters");
  }

  std::vector<ChrfSegmentStats> stats;
  stats.reserve(hyps.size());
  std::vector<ChrfStatTriple> sums(char_order + word_order);
  for (size_t i = 0; i < hyps.size(); ++i) {
    stats.push_back(
        chrf_segment_stats(hyps[i], refs[i], char_order, word_order, beta));
    for (size_t k = 0; k < sums.size(); ++k) {
      sums[k].hyp_ngrams += stats.back().orders[k].hyp_ngrams;
      sums[k].ref_ngrams += stats.back().orders[k].ref_ngrams;
      sums[k].matched += stats.back().orders[k].matched;
    }
  }
  return {chrf_from_sums(sums, beta), std::move(stats)};
}

std::pair<double, std::vector<ChrfSegmentStats>> pivot_deviation(
    std::span<const std::string> pivots, std::span<const std::string> hyps) {
  return chrf(hyps, pivots, 6, 0, 2.0);
}

}  // namespace pivotmt
