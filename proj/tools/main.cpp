// Command-line front end: ingest corpora, build indexes, run cells and
// ablations, compare systems, run the lexical analyses, re-emit reports.

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "pivotmt/config.hpp"
#include "pivotmt/errors.hpp"
#include "pivotmt/io_util.hpp"
#include "pivotmt/report.hpp"
#include "pivotmt/runner.hpp"
#include "pivotmt/stats.hpp"
#include "pivotmt/version.hpp"

namespace fs = std::filesystem;
using namespace pivotmt;

namespace {

struct GlobalFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string backend;
  std::string out_dir;
};

ExperimentConfig resolve_config(const GlobalFlags& flags) {
  if (flags.config_path.empty()) {
    throw ValidationError("--config PATH is required for this command");
  }
  ExperimentConfig config = load_config(flags.config_path);
  // config file paths are relative to the config file's directory
  const fs::path base = fs::path(flags.config_path).parent_path();
  const auto rebase = [&base](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).string();
  };
  rebase(config.corpus_path);
  rebase(config.datastore_path);
  rebase(config.backend.replay_fixture);
  rebase(config.backend.mock_map_file);
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.backend.empty()) config.backend.kind = flags.backend;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  return config;
}

std::unique_ptr<TokenCounter> make_token_counter(const std::string& spec) {
  if (spec == "whitespace") return std::make_unique<WhitespaceTokenCounter>();
  if (spec.rfind("bpe:", 0) == 0) {
    return std::make_unique<BpeTokenCounter>(spec.substr(4));
  }
  if (spec.rfind("remote:", 0) == 0) {
    return std::make_unique<RemoteTokenCounter>(spec.substr(7));
  }
  throw ValidationError("unknown tokenizer spec '" + spec +
                        "' (use whitespace | bpe:MERGES | remote:URL)");
}

int cmd_ingest(const GlobalFlags& flags) {
  auto config = resolve_config(flags);
  const Corpus corpus = load_corpus(config.corpus_path, config.corpus);
  const fs::path out(config.out_dir);
  save_triplets((out / "train.jsonl").string(), corpus.train);
  save_triplets((out / "test.jsonl").string(), corpus.test);
  const auto leakage = validate_no_leakage(corpus);
  std::cout << "corpus '" << corpus.name << "': |train|=" << corpus.train.size()
            << " |test|=" << corpus.test.size()
            << " leakage=" << (leakage.passed() ? "none" : "FOUND") << "\n"
            << "wrote " << (out / "train.jsonl").string() << ", "
            << (out / "test.jsonl").string() << "\n";
  return 0;
}

int cmd_index(const GlobalFlags& flags) {
  auto config = resolve_config(flags);
  if (config.datastore_path.empty()) {
    config.datastore_path = (fs::path(config.out_dir) / "datastore.jsonl").string();
  }
  const Corpus corpus = load_corpus(config.corpus_path, config.corpus);
  auto provider = make_embedding_provider(config);
  const Datastore store = build_index(corpus, *provider,
                                      config.embedding.batch_size,
                                      config.embedding.parallelism);
  save_index(store, config.datastore_path);
  std::cout << "indexed " << store.size() << " train sources (dim "
            << store.dimension << ", provider " << store.provider_id
            << ") -> " << config.datastore_path << "\n";
  return 0;
}

int cmd_run(const GlobalFlags& flags, int k) {
  auto config = resolve_config(flags);
  Experiment experiment(config);
  ExperimentResult result;
  result.config_digest = config_digest(config);
  result.corpus_name = experiment.corpus().name;
  result.model_id = config.model_id;
  result.source_lang = experiment.corpus().source_lang;
  result.pivot_lang = experiment.corpus().pivot_lang;
  result.target_lang = experiment.corpus().target_lang;
  result.condition = config.condition;
  result.cells.push_back(experiment.run_cell(k));
  write_experiment_outputs(result, config, config.out_dir);
  const auto& row = result.cells[0].row;
  std::cout << "k=" << row.k << " BLEU=" << row.report.bleu
            << " chrF++=" << row.report.chrfpp << " (" << row.n_generations
            << " generations, " << row.n_context_overflows
            << " context overflows)\nwrote " << config.out_dir << "\n";
  return 0;
}

int cmd_ablate(const GlobalFlags& flags) {
  auto config = resolve_config(flags);
  Experiment experiment(config);
  const auto result = experiment.run_ablation();
  std::cout << ablation_csv(result) << "wrote " << config.out_dir << "\n";
  return 0;
}

int cmd_compare(const std::string& result_a_path,
                const std::string& result_b_path, int k_a, int k_b,
                const std::string& metric_name, int64_t n, uint64_t seed,
                const std::string& out_path) {
  const auto result_a = experiment_result_from_json(io::read_file(result_a_path));
  const auto result_b = experiment_result_from_json(io::read_file(result_b_path));
  const BootstrapMetric metric = metric_name == "bleu" ? BootstrapMetric::kBleu
                                                       : BootstrapMetric::kChrfpp;
  const auto report = compare_systems(result_a, result_b, k_a, k_b, metric, n, seed);
  const std::string body = to_json_string(report);
  if (!out_path.empty()) io::write_file_atomic(out_path, body);
  std::cout << "metric=" << to_string(report.metric)
            << " delta=" << report.delta_observed << " p=" << report.p_value
            << " (n=" << report.n_resamples << ", direction "
            << report.direction << ")\n";
  if (!out_path.empty()) std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_analyze(const GlobalFlags& flags, const std::string& what,
                const std::string& policy_name, const std::string& tokenizer,
                const std::string& result_path) {
  auto config = resolve_config(flags);
  const Corpus corpus = load_corpus(config.corpus_path, config.corpus);
  const fs::path out(config.out_dir);

  if (what == "jaccard") {
    const auto rows = jaccard_table(corpus, norm_policy_from_string(policy_name));
    const std::string csv = jaccard_csv(rows);
    io::write_file_atomic((out / "jaccard.csv").string(), csv);
    std::cout << csv;
    return 0;
  }
  if (what == "fertility") {
    auto counter = make_token_counter(tokenizer);
    const auto rows = fertility_table(corpus, *counter);
    const std::string csv = fertility_csv(rows);
    io::write_file_atomic((out / "fertility.csv").string(), csv);
    std::cout << csv;
    return 0;
  }
  if (what == "deviation") {
    if (result_path.empty()) {
      throw ValidationError("analyze deviation needs --result RESULT_JSON");
    }
    const auto result = experiment_result_from_json(io::read_file(result_path));
    const auto rows = deviation_table(result, corpus);
    const std::string csv = deviation_csv(rows);
    io::write_file_atomic((out / "deviation.csv").string(), csv);
    std::cout << csv;
    return 0;
  }
  throw ValidationError("unknown analysis '" + what +
                        "' (jaccard | fertility | deviation)");
}

int cmd_report(const GlobalFlags& flags, const std::string& result_path) {
  auto config = resolve_config(flags);
  const auto result = experiment_result_from_json(io::read_file(result_path));
  write_experiment_outputs(result, config, config.out_dir);
  std::cout << summary_text(result, config) << "wrote " << config.out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pivot-augmented few-shot MT experimentation pipeline"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Experiment config JSON");
  uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Override config seed");
  app.add_option("--backend", flags.backend,
                 "Override backend kind (live|mock|replay)");
  app.add_option("--out", flags.out_dir, "Override output directory");

  auto* ingest = app.add_subcommand("ingest", "Validate and store a corpus");
  auto* index = app.add_subcommand("index", "Build and save the datastore");

  auto* run = app.add_subcommand("run", "Run one (condition, k) cell");
  int run_k = 0;
  run->add_option("--k", run_k, "Number of in-context examples")->required();

  auto* ablate = app.add_subcommand("ablate", "Run the configured k sweep");

  auto* compare = app.add_subcommand("compare", "Paired bootstrap between runs");
  std::string cmp_a, cmp_b, cmp_metric = "chrfpp", cmp_out;
  int cmp_ka = 0, cmp_kb = 0;
  int64_t cmp_n = 10000;
  uint64_t cmp_seed = 0;
  compare->add_option("--a", cmp_a, "result.json of system A")->required();
  compare->add_option("--b", cmp_b, "result.json of system B")->required();
  compare->add_option("--k-a", cmp_ka, "k cell from system A")->required();
  compare->add_option("--k-b", cmp_kb, "k cell from system B")->required();
  compare->add_option("--metric", cmp_metric, "bleu|chrfpp");
  compare->add_option("--n", cmp_n, "Resamples (default 10000)");
  compare->add_option("--bootstrap-seed", cmp_seed, "Bootstrap RNG seed");
  compare->add_option("--report-out", cmp_out, "Write the report JSON here");

  auto* analyze = app.add_subcommand("analyze", "jaccard|fertility|deviation");
  std::string an_what, an_policy = "folded", an_tokenizer = "whitespace",
              an_result;
  analyze->add_option("what", an_what, "jaccard|fertility|deviation")
      ->required();
  analyze->add_option("--policy", an_policy,
                      "Vocabulary normalization (raw-ws|folded)");
  analyze->add_option("--tokenizer", an_tokenizer,
                      "whitespace | bpe:MERGES_FILE | remote:BASE_URL");
  analyze->add_option("--result", an_result,
                      "result.json (deviation analysis)");

  auto* report = app.add_subcommand("report", "Re-emit reports from a result");
  std::string report_result;
  report->add_option("--result", report_result, "result.json path")->required();

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) flags.seed = seed_value;

  try {
    if (ingest->parsed()) return cmd_ingest(flags);
    if (index->parsed()) return cmd_index(flags);
    if (run->parsed()) return cmd_run(flags, run_k);
    if (ablate->parsed()) return cmd_ablate(flags);
    if (compare->parsed()) {
      return cmd_compare(cmp_a, cmp_b, cmp_ka, cmp_kb, cmp_metric, cmp_n,
                         cmp_seed, cmp_out);
    }
    if (analyze->parsed()) {
      return cmd_analyze(flags, an_what, an_policy, an_tokenizer, an_result);
    }
    if (report->parsed()) return cmd_report(flags, report_result);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
