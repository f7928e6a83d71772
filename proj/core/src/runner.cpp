#include "pivotmt/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <unordered_map>

#include "pivotmt/errors.hpp"
#include "pivotmt/report.hpp"
#include "pivotmt/text.hpp"

namespace pivotmt {

bool CellRow::operator==(const CellRow& o) const {
  return k == o.k && condition == o.condition &&
         report.bleu == o.report.bleu && report.chrfpp == o.report.chrfpp &&
         report.bleu_sig == o.report.bleu_sig &&
         report.chrf_sig == o.report.chrf_sig &&
         report.n_segments == o.report.n_segments &&
         report.n_empty_hyps == o.report.n_empty_hyps &&
         n_generations == o.n_generations && n_errors == o.n_errors &&
         n_context_overflows == o.n_context_overflows && error == o.error;
}

namespace {

bool stats_equal(const BleuSegmentStats& a, const BleuSegmentStats& b) {
  return a.match_counts == b.match_counts && a.total_counts == b.total_counts &&
         a.hyp_len == b.hyp_len && a.ref_len == b.ref_len;
}

bool stats_equal(const ChrfSegmentStats& a, const ChrfSegmentStats& b) {
  if (a.char_order != b.char_order || a.word_order != b.word_order ||
      a.beta != b.beta || a.orders.size() != b.orders.size()) {
    return false;
  }
  for (size_t i = 0; i < a.orders.size(); ++i) {
    if (a.orders[i].hyp_ngrams != b.orders[i].hyp_ngrams ||
        a.orders[i].ref_ngrams != b.orders[i].ref_ngrams ||
        a.orders[i].matched != b.orders[i].matched) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool CellResult::operator==(const CellResult& o) const {
  if (!(row == o.row) || segments != o.segments ||
      bleu_stats.size() != o.bleu_stats.size() ||
      chrf_stats.size() != o.chrf_stats.size()) {
    return false;
  }
  for (size_t i = 0; i < bleu_stats.size(); ++i) {
    if (!stats_equal(bleu_stats[i], o.bleu_stats[i])) return false;
  }
  for (size_t i = 0; i < chrf_stats.size(); ++i) {
    if (!stats_equal(chrf_stats[i], o.chrf_stats[i])) return false;
  }
  return true;
}

bool ExperimentResult::operator==(const ExperimentResult& o) const {
  return config_digest == o.config_digest && corpus_name == o.corpus_name &&
         model_id == o.model_id && source_lang == o.source_lang &&
         pivot_lang == o.pivot_lang && target_lang == o.target_lang &&
         condition == o.condition && cells == o.cells;
}

const CellResult* ExperimentResult::find_cell(int k) const {
  for (const auto& cell : cells) {
    if (cell.row.k == k) return &cell;
  }
  return nullptr;
}

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)) {
  if (config_.corpus_path.empty()) {
    throw ValidationError("experiment needs corpus.path");
  }
  corpus_ = load_corpus(config_.corpus_path, config_.corpus);
  if (config_.condition == Condition::kPivot) {
    for (const auto& t : corpus_.test) {
      if (text::strip(t.pivot).empty()) {
        throw ValidationError(
            "pivot condition requires a pivot column; test id " +
            std::to_string(t.id) + " has none");
      }
    }
  }
  labels_ = labels_for_corpus(corpus_, config_.lang_labels);
  provider_ = make_embedding_provider(config_);

  namespace fs = std::filesystem;
  if (!config_.datastore_path.empty() && fs::exists(config_.datastore_path)) {
    store_ = load_index(config_.datastore_path, provider_->id());
    if (store_.corpus_name != corpus_.name) {
      throw ValidationError("datastore was built for corpus '" +
                            store_.corpus_name + "', config names '" +
                            corpus_.name + "'");
    }
  } else {
    store_ = build_index(corpus_, *provider_, config_.embedding.batch_size,
                         config_.embedding.parallelism);
    if (!config_.datastore_path.empty()) {
      save_index(store_, config_.datastore_path);
    }
  }
  backend_ = make_backend(config_, corpus_);
  cache_ = std::make_unique<GenerationCache>(config_.out_dir);
}

Experiment::~Experiment() = default;

CellResult Experiment::run_cell(int k) {
  if (k < 0) throw ValidationError("k must be >= 0");

  if (test_embeddings_.empty() && !corpus_.test.empty() && k > 0) {
    std::vector<std::string> sources;
    sources.reserve(corpus_.test.size());
    for (const auto& t : corpus_.test) sources.push_back(t.source);
    test_embeddings_ = embed_texts(*provider_, sources,
                                   config_.embedding.batch_size,
                                   config_.embedding.parallelism);
  }

  std::vector<PromptBundle> bundles;
  bundles.reserve(corpus_.test.size());
  for (size_t i = 0; i < corpus_.test.size(); ++i) {
    const Triplet& query = corpus_.test[i];
    RetrievalResult hits;
    if (k > 0) {
      hits = retrieve_topk(store_, test_embeddings_[i],
                           static_cast<size_t>(k));
    }
    bundles.push_back(build_prompt(query, hits, store_, config_.condition,
                                   labels_, config_.demo_order));
  }

  const auto outcomes = generate_all(
      *backend_, bundles, config_.sampling, config_.model_id, config_.cleaning,
      cache_.get(), config_.generation_parallelism);

  CellResult result;
  result.row.k = k;
  result.row.condition = config_.condition;

  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  hyps.reserve(outcomes.size());
  refs.reserve(outcomes.size());
  for (size_t i = 0; i < outcomes.size(); ++i) {
    const auto& outcome = outcomes[i];
    if (outcome.error_kind == GenerationErrorKind::kTransport) {
      // partial generations are already persisted in the cache
      throw TransportError("cell k=" + std::to_string(k) +
                           " aborted at query id " +
                           std::to_string(corpus_.test[i].id) + ": " +
                           outcome.error);
    }
    SegmentOutcome seg;
    seg.query_id = corpus_.test[i].id;
    if (outcome.error_kind == GenerationErrorKind::kContextOverflow) {
      seg.context_overflow = true;
      seg.prompt_hash = prompt_hash(render_chatml(bundles[i]),
                                    config_.sampling, config_.model_id);
      seg.hypothesis = "";
      ++result.row.n_context_overflows;
      ++result.row.n_errors;
    } else {
      seg.prompt_hash = outcome.record->prompt_hash;
      seg.hypothesis = outcome.record->hypothesis;
      ++result.row.n_generations;
    }
    hyps.push_back(seg.hypothesis);
    refs.push_back(corpus_.test[i].target);
    result.segments.push_back(std::move(seg));
  }

  auto scored = score_corpus(hyps, refs);
  result.row.report = std::move(scored.report);
  result.bleu_stats = std::move(scored.bleu_stats);
  result.chrf_stats = std::move(scored.chrf_stats);
  return result;
}

ExperimentResult Experiment::run_ablation() {
  ExperimentResult result;
  result.config_digest = config_digest(config_);
  result.corpus_name = corpus_.name;
  result.model_id = config_.model_id;
  result.source_lang = corpus_.source_lang;
  result.pivot_lang = corpus_.pivot_lang;
  result.target_lang = corpus_.target_lang;
  result.condition = config_.condition;

  for (int k : config_.k_values) {
    try {
      result.cells.push_back(run_cell(k));
    } catch (const Error& e) {
      CellResult failed;
      failed.row.k = k;
      failed.row.condition = config_.condition;
      failed.row.error = e.what();
      result.cells.push_back(std::move(failed));
      std::cerr << "cell k=" << k << " failed: " << e.what() << "\n";
    }
  }
  write_experiment_outputs(result, config_, config_.out_dir);
  return result;
}

BootstrapReport compare_systems(const ExperimentResult& result_a,
                                const ExperimentResult& result_b, int k_a,
                                int k_b, BootstrapMetric metric, int64_t n,
                                uint64_t seed) {
  const CellResult* cell_a = result_a.find_cell(k_a);
  const CellResult* cell_b = result_b.find_cell(k_b);
  if (cell_a == nullptr || cell_b == nullptr) {
    throw ValidationError("compare_systems: requested k cell not present");
  }
  if (cell_a->segments.size() != cell_b->segments.size()) {
    throw ValidationError("compare_systems: test sets differ in size");
  }
  for (size_t i = 0; i < cell_a->segments.size(); ++i) {
    if (cell_a->segments[i].query_id != cell_b->segments[i].query_id) {
      throw ValidationError(
          "compare_systems: test sets differ at position " +
          std::to_string(i) + " (query ids " +
          std::to_string(cell_a->segments[i].query_id) + " vs " +
          std::to_string(cell_b->segments[i].query_id) + ")");
    }
  }
  if (metric == BootstrapMetric::kBleu) {
    return paired_bootstrap(cell_a->bleu_stats, cell_b->bleu_stats, n, seed);
  }
  return paired_bootstrap(cell_a->chrf_stats, cell_b->chrf_stats, n, seed);
}

namespace {

std::string cap_code(const std::string& code) {
  if (code.empty()) return code;
  std::string out = code;
  if (out[0] >= 'a' && out[0] <= 'z') out[0] = out[0] - 'a' + 'A';
  return out;
}

std::vector<std::string> column_texts(const Corpus& corpus,
                                      const std::string& which) {
  std::vector<std::string> out;
  out.reserve(corpus.train.size() + corpus.test.size());
  for (const auto* split : {&corpus.train, &corpus.test}) {
    for (const auto& t : *split) {
      if (which == "src") {
        out.push_back(t.source);
      } else if (which == "piv") {
        out.push_back(t.pivot);
      } else {
        out.push_back(t.target);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<JaccardRow> jaccard_table(const Corpus& corpus, NormPolicy policy) {
  const auto src = extract_vocabulary(column_texts(corpus, "src"), policy,
                                      corpus.source_lang);
  const auto piv = extract_vocabulary(column_texts(corpus, "piv"), policy,
                                      corpus.pivot_lang);
  const auto tgt = extract_vocabulary(column_texts(corpus, "tgt"), policy,
                                      corpus.target_lang);

  std::vector<JaccardRow> rows;
  const auto add = [&rows](const Vocabulary& a, const Vocabulary& b) {
    rows.push_back({cap_code(a.lang) + "-" + cap_code(b.lang),
                    jaccard_similarity(a, b), a.words.size(), b.words.size()});
  };
  add(src, piv);
  add(src, tgt);
  add(piv, tgt);
  return rows;
}

std::vector<FertilityRow> fertility_table(const Corpus& corpus,
                                          TokenCounter& counter) {
  std::vector<FertilityRow> rows;
  const std::string dataset = cap_code(corpus.target_lang);
  for (const auto& [which, lang] :
       {std::pair<std::string, std::string>{"src", corpus.source_lang},
        {"piv", corpus.pivot_lang},
        {"tgt", corpus.target_lang}}) {
    rows.push_back({dataset, cap_code(lang),
                    token_fertility(column_texts(corpus, which), counter)});
  }
  return rows;
}

std::vector<DeviationRow> deviation_table(const ExperimentResult& result,
                                          const Corpus& corpus) {
  std::unordered_map<int64_t, const Triplet*> by_id;
  for (const auto& t : corpus.test) by_id[t.id] = &t;

  std::vector<DeviationRow> rows;
  for (const auto& cell : result.cells) {
    if (!cell.row.error.empty()) continue;
    std::vector<std::string> pivots;
    std::vector<std::string> hyps;
    pivots.reserve(cell.segments.size());
    hyps.reserve(cell.segments.size());
    for (const auto& seg : cell.segments) {
      const auto it = by_id.find(seg.query_id);
      if (it == by_id.end()) {
        throw ValidationError("deviation_table: result references query id " +
                              std::to_string(seg.query_id) +
                              " missing from the corpus test split");
      }
      pivots.push_back(it->second->pivot);
      hyps.push_back(seg.hypothesis);
    }
    if (pivots.empty()) continue;
    rows.push_back({cell.row.k, pivot_deviation(pivots, hyps).first});
  }
  return rows;
}

}  // namespace pivotmt
