#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pivotmt {

/// One aligned (English source, pivot translation, target translation)
/// record; the unit of retrieval and demonstration.
struct Triplet {
  int64_t id = 0;
  std::string source;
  std::string pivot;
  std::string target;

  bool operator==(const Triplet&) const = default;
};

/// Word-normalization policies for vocabulary extraction.
///   raw-ws: NFC, split on Unicode whitespace.
///   folded: NFC, whitespace split, strip leading/trailing Unicode
///           punctuation, full case fold. Default for Jaccard analysis.
enum class NormPolicy { kRawWs, kFolded };

std::string to_string(NormPolicy policy);
NormPolicy norm_policy_from_string(const std::string& name);

struct Vocabulary {
  std::string lang;
  std::set<std::string> words;
  NormPolicy policy = NormPolicy::kFolded;
};

struct Corpus {
  std::string name;
  std::string source_lang;
  std::string pivot_lang;
  std::string target_lang;
  std::vector<Triplet> train;
  std::vector<Triplet> test;
};

/// Pre-split corpora name one file per split; single-file corpora are
/// partitioned by a seeded shuffle.
struct PreSplitFiles {
  std::string train_file;
  std::string test_file;
};

struct SeededSplit {
  int64_t n_train = 0;
  int64_t n_test = 0;
  uint64_t seed = 0;
};

struct CorpusDescriptor {
  std::string name;
  std::string source_lang = "eng";
  std::string pivot_lang;
  std::string target_lang;
  std::optional<PreSplitFiles> files;   // `path` is the containing directory
  std::optional<SeededSplit> split;     // `path` is one JSONL file
};

/// Reads one JSONL triplet file ({"id": int, "src": str, "piv": str,
/// "tgt": str} per line). Throws ParseError with the offending line number,
/// ValidationError on duplicate ids or empty fields.
std::vector<Triplet> load_triplets(const std::string& path);

/// Canonical writer; load_triplets(save_triplets(x)) round-trips byte-exactly.
void save_triplets(const std::string& path, std::span<const Triplet> triplets);

/// Deterministic seeded partition into (train, test); sizes are exact.
/// Throws ValidationError when n_train + n_test exceeds the input size.
std::pair<std::vector<Triplet>, std::vector<Triplet>> split_corpus(
    std::span<const Triplet> triplets, int64_t n_train, int64_t n_test,
    uint64_t seed);

struct LeakageViolation {
  int64_t test_id = 0;
  int64_t train_id = 0;
};

struct LeakageReport {
  std::vector<LeakageViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Lists every test source that appears verbatim (after NFC normalization
/// and trimming) among train sources. Verbatim-only; paraphrase detection
/// is out of scope.
LeakageReport validate_no_leakage(const Corpus& corpus);

/// Loads and fully validates a corpus. All Corpus invariants are enforced:
/// non-empty fields, unique ids, disjoint splits, and no train/test source
/// leakage (a leaking corpus throws rather than silently degrading
/// retrieval hygiene downstream).
Corpus load_corpus(const std::string& path, const CorpusDescriptor& descriptor);

/// Unique normalized word forms from `texts` under `policy`. Idempotent:
/// re-extracting from the result yields the same set.
Vocabulary extract_vocabulary(std::span<const std::string> texts,
                              NormPolicy policy, const std::string& lang = "");

}  // namespace pivotmt
