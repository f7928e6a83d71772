#include "pivotmt/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "pivotmt/errors.hpp"
#include "pivotmt/io_util.hpp"
#include "pivotmt/text.hpp"

namespace pivotmt {

using nlohmann::json;

std::string to_string(NormPolicy policy) {
  return policy == NormPolicy::kRawWs ? "raw-ws" : "folded";
}

NormPolicy norm_policy_from_string(const std::string& name) {
  if (name == "raw-ws") return NormPolicy::kRawWs;
  if (name == "folded") return NormPolicy::kFolded;
  throw ValidationError("unknown normalization policy: " + name);
}

std::vector<Triplet> load_triplets(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);

  std::vector<Triplet> out;
  std::unordered_map<int64_t, size_t> seen_ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::strip(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": malformed JSON record: " + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("src") ||
        !rec.contains("piv") || !rec.contains("tgt")) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": record must carry id/src/piv/tgt");
    }
    if (!rec["id"].is_number_integer() || rec["id"].get<int64_t>() < 0) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": id must be a non-negative integer");
    }
    Triplet t;
    t.id = rec["id"].get<int64_t>();
    try {
      t.source = rec["src"].get<std::string>();
      t.pivot = rec["piv"].get<std::string>();
      t.target = rec["tgt"].get<std::string>();
    } catch (const json::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": src/piv/tgt must be strings");
    }
    for (const auto& [field, value] :
         {std::pair<const char*, const std::string&>{"src", t.source},
          {"piv", t.pivot},
          {"tgt", t.target}}) {
      if (text::strip(value).empty()) {
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": empty field '" + field + "' in triplet id " +
                              std::to_string(t.id));
      }
    }
    auto [it, inserted] = seen_ids.emplace(t.id, line_no);
    if (!inserted) {
      throw ValidationError(path + ": duplicate id " + std::to_string(t.id) +
                            " (lines " + std::to_string(it->second) + " and " +
                            std::to_string(line_no) + ")");
    }
    out.push_back(std::move(t));
  }
  return out;
}

void save_triplets(const std::string& path, std::span<const Triplet> triplets) {
  std::ostringstream buf;
  for (const auto& t : triplets) {
    nlohmann::ordered_json rec;
    rec["id"] = t.id;
    rec["src"] = t.source;
    rec["piv"] = t.pivot;
    rec["tgt"] = t.target;
    buf << rec.dump() << "\n";
  }
  io::write_file_atomic(path, buf.str());
}

namespace {

// Seedable Fisher-Yates with an explicit rejection-sampled bound so the
// partition is identical across standard library implementations.
uint64_t bounded_rand(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

std::pair<std::vector<Triplet>, std::vector<Triplet>> split_corpus(
    std::span<const Triplet> triplets, int64_t n_train, int64_t n_test,
    uint64_t seed) {
  if (n_train < 0 || n_test < 0) {
    throw ValidationError("split sizes must be non-negative");
  }
  if (n_train + n_test > static_cast<int64_t>(triplets.size())) {
    throw ValidationError(
        "insufficient records: need " + std::to_string(n_train + n_test) +
        ", have " + std::to_string(triplets.size()));
  }
  std::vector<size_t> order(triplets.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[bounded_rand(rng, i)]);
  }
  std::vector<Triplet> train;
  std::vector<Triplet> test;
  train.reserve(n_train);
  test.reserve(n_test);
  for (int64_t i = 0; i < n_train; ++i) train.push_back(triplets[order[i]]);
  for (int64_t i = 0; i < n_test; ++i) {
    test.push_back(triplets[order[n_train + i]]);
  }
  return {std::move(train), std::move(test)};
}

LeakageReport validate_no_leakage(const Corpus& corpus) {
  LeakageReport report;
  std::unordered_map<std::string, std::vector<int64_t>> train_sources;
  for (const auto& t : corpus.train) {
    train_sources[text::strip(text::nfc(t.source))].push_back(t.id);
  }
  for (const auto& t : corpus.test) {
    const auto it = train_sources.find(text::strip(text::nfc(t.source)));
    if (it == train_sources.end()) continue;
    for (int64_t train_id : it->second) {
      report.violations.push_back({t.id, train_id});
    }
  }
  return report;
}

namespace {

void validate_corpus(const Corpus& corpus) {
  std::unordered_set<int64_t> train_ids;
  for (const auto& t : corpus.train) train_ids.insert(t.id);
  for (const auto& t : corpus.test) {
    if (train_ids.count(t.id)) {
      throw ValidationError("corpus '" + corpus.name + "': id " +
                            std::to_string(t.id) +
                            " appears in both train and test");
    }
  }
  const auto leakage = validate_no_leakage(corpus);
  if (!leakage.passed()) {
    std::ostringstream msg;
    msg << "corpus '" << corpus.name << "': " << leakage.violations.size()
        << " test source(s) appear verbatim in train;";
    for (size_t i = 0; i < leakage.violations.size() && i < 5; ++i) {
      msg << " test id " << leakage.violations[i].test_id << " == train id "
          << leakage.violations[i].train_id << ";";
    }
    throw ValidationError(msg.str());
  }
}

}  // namespace

Corpus load_corpus(const std::string& path, const CorpusDescriptor& descriptor) {
  Corpus corpus;
  corpus.name = descriptor.name;
  corpus.source_lang = descriptor.source_lang;
  corpus.pivot_lang = descriptor.pivot_lang;
  corpus.target_lang = descriptor.target_lang;

  if (descriptor.files.has_value()) {
    const std::filesystem::path base(path);
    corpus.train = load_triplets((base / descriptor.files->train_file).string());
    corpus.test = load_triplets((base / descriptor.files->test_file).string());
  } else if (descriptor.split.has_value()) {
    const auto all = load_triplets(path);
    std::tie(corpus.train, corpus.test) =
        split_corpus(all, descriptor.split->n_train, descriptor.split->n_test,
                     descriptor.split->seed);
  } else {
    // no split directive: everything goes to train
    corpus.train = load_triplets(path);
  }
  validate_corpus(corpus);
  return corpus;
}

Vocabulary extract_vocabulary(std::span<const std::string> texts,
                              NormPolicy policy, const std::string& lang) {
  Vocabulary vocab;
  vocab.lang = lang;
  vocab.policy = policy;
  for (const auto& t : texts) {
    for (const auto& word : text::split_ws(text::nfc(t))) {
      if (policy == NormPolicy::kRawWs) {
        vocab.words.insert(word);
      } else {
        const std::string stripped = text::strip_punct(word);
        if (stripped.empty()) continue;
        vocab.words.insert(text::casefold(stripped));
      }
    }
  }
  return vocab;
}

}  // namespace pivotmt
