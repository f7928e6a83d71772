#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "pivotmt/config.hpp"
#include "pivotmt/errors.hpp"
#include "pivotmt/io_util.hpp"
#include "pivotmt/report.hpp"
#include "pivotmt/runner.hpp"
#include "test_util.hpp"

using namespace pivotmt;

namespace {

std::vector<Triplet> synthetic_triplets(int begin_id, int n,
                                        const std::string& tag) {
  std::vector<Triplet> out;
  for (int i = 0; i < n; ++i) {
    const int id = begin_id + i;
    out.push_back({id,
                   tag + " source sentence number " + std::to_string(id) +
                       " in plain english",
                   "pivot " + tag + " " + std::to_string(id) + " वाक्य",
                   "target " + tag + " " + std::to_string(id) + " उतारो"});
  }
  return out;
}

// Writes a pre-split corpus into dir and returns a ready config.
ExperimentConfig synthetic_config(const std::filesystem::path& dir,
                                  int n_train = 30, int n_test = 8) {
  save_triplets((dir / "train.jsonl").string(),
                synthetic_triplets(0, n_train, "train"));
  save_triplets((dir / "test.jsonl").string(),
                synthetic_triplets(1000, n_test, "test"));
  ExperimentConfig config;
  config.corpus_path = dir.string();
  config.corpus.name = "synthetic";
  config.corpus.source_lang = "eng";
  config.corpus.pivot_lang = "mar";
  config.corpus.target_lang = "gom";
  config.corpus.files = PreSplitFiles{"train.jsonl", "test.jsonl"};
  config.backend.kind = "mock";
  config.backend.mock_perfect = true;
  config.model_id = "test-model";
  config.condition = Condition::kPivot;
  config.k_values = {0, 1, 2, 3};
  config.out_dir = (dir / "out").string();
  return config;
}

}  // namespace

TEST_CASE("perfect-oracle mock scores 100/100 in every cell") {
  testutil::TempDir tmp("runner_perfect");
  auto config = synthetic_config(tmp.path());
  Experiment experiment(config);
  const auto result = experiment.run_ablation();

  REQUIRE(result.cells.size() == 4);
  for (const auto& cell : result.cells) {
    CHECK(cell.row.error.empty());
    CHECK(cell.row.report.bleu == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(cell.row.report.chrfpp == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(cell.row.n_generations == 8);
    CHECK(cell.row.report.n_segments == 8);
    CHECK(cell.row.report.n_empty_hyps == 0);
  }
  // CSV prints the fixed-width scores
  const auto csv = ablation_csv(result);
  CHECK(csv.find("100.00,100.00") != std::string::npos);
  CHECK(csv.find("Model,Source,Pivot,Target,k,BLEU,chrF++") == 0);
}

TEST_CASE("empty-string mock drives BLEU to zero") {
  testutil::TempDir tmp("runner_empty");
  auto config = synthetic_config(tmp.path());
  config.backend.mock_perfect = false;
  // a mock map that answers every test source with an empty string
  const auto map_file = tmp.path() / "map.jsonl";
  {
    std::ofstream out(map_file);
    for (const auto& t : synthetic_triplets(1000, 8, "test")) {
      nlohmann::json rec;
      rec["src"] = t.source;
      rec["out"] = "";
      out << rec.dump() << "\n";
    }
  }
  config.backend.mock_map_file = map_file.string();
  config.k_values = {0};

  Experiment experiment(config);
  const auto cell = experiment.run_cell(0);
  CHECK(cell.row.report.bleu == 0.0);
  CHECK(cell.row.report.n_empty_hyps == 8);
}

TEST_CASE("run_cell wires retrieval, prompts and provenance") {
  testutil::TempDir tmp("runner_cell");
  auto config = synthetic_config(tmp.path());
  Experiment experiment(config);
  const auto cell = experiment.run_cell(2);

  REQUIRE(cell.segments.size() == 8);
  REQUIRE(cell.bleu_stats.size() == 8);
  REQUIRE(cell.chrf_stats.size() == 8);
  for (const auto& seg : cell.segments) {
    CHECK(seg.query_id >= 1000);
    CHECK(seg.prompt_hash.size() == 64);
    // every hypothesis traces to a persisted record
    const auto rec = experiment.cache().get(seg.prompt_hash);
    REQUIRE(rec.has_value());
    CHECK(rec->hypothesis == seg.hypothesis);
  }
}

TEST_CASE("ablation is resumable: second run reuses every generation") {
  testutil::TempDir tmp("runner_resume");
  auto config = synthetic_config(tmp.path());
  config.k_values = {0, 1};
  {
    Experiment first(config);
    first.run_ablation();
  }
  const auto cache_size_after_first =
      GenerationCache((std::filesystem::path(config.out_dir)).string()).size();

  // a replay backend over the cache can only answer recorded hashes, so a
  // second identical run that needed any new generation would fail
  std::string replay_fixture = (tmp.path() / "replay.jsonl").string();
  {
    std::ifstream in(std::filesystem::path(config.out_dir) /
                     "generations.jsonl");
    std::ostringstream fixture;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto rec = nlohmann::json::parse(line);
      nlohmann::json out;
      out["prompt_hash"] = rec.at("prompt_hash");
      out["raw_output"] = rec.at("raw_output");
      fixture << out.dump() << "\n";
    }
    io::write_file_atomic(replay_fixture, fixture.str());
  }
  auto replay_config = config;
  replay_config.backend.kind = "replay";
  replay_config.backend.replay_fixture = replay_fixture;
  replay_config.out_dir = (tmp.path() / "out_replay").string();
  Experiment replay_run(replay_config);
  const auto result = replay_run.run_ablation();
  for (const auto& cell : result.cells) CHECK(cell.row.error.empty());

  // and the original cache did not grow
  {
    Experiment second(config);
    second.run_ablation();
  }
  CHECK(GenerationCache(config.out_dir).size() == cache_size_after_first);
}

TEST_CASE("replay runs are byte-identical") {
  testutil::TempDir tmp("runner_golden");
  auto config = synthetic_config(tmp.path());
  config.k_values = {0, 1, 2};
  {
    Experiment record_run(config);
    record_run.run_ablation();
  }
  // convert the cache into a replay fixture
  std::string replay_fixture = (tmp.path() / "replay.jsonl").string();
  {
    std::ifstream in(std::filesystem::path(config.out_dir) /
                     "generations.jsonl");
    std::ostringstream fixture;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto rec = nlohmann::json::parse(line);
      nlohmann::json out;
      out["prompt_hash"] = rec.at("prompt_hash");
      out["raw_output"] = rec.at("raw_output");
      fixture << out.dump() << "\n";
    }
    io::write_file_atomic(replay_fixture, fixture.str());
  }

  auto replay_config = config;
  replay_config.backend.kind = "replay";
  replay_config.backend.replay_fixture = replay_fixture;

  replay_config.out_dir = (tmp.path() / "replay_a").string();
  Experiment run_a(replay_config);
  run_a.run_ablation();
  replay_config.out_dir = (tmp.path() / "replay_b").string();
  Experiment run_b(replay_config);
  run_b.run_ablation();

  for (const char* file : {"ablation.csv", "result.json"}) {
    const auto a = io::read_file(
        (std::filesystem::path(tmp.path()) / "replay_a" / file).string());
    const auto b = io::read_file(
        (std::filesystem::path(tmp.path()) / "replay_b" / file).string());
    CHECK(a == b);
  }
}

TEST_CASE("context overflow is flagged per row, not masked") {
  testutil::TempDir tmp("runner_overflow");
  auto config = synthetic_config(tmp.path());
  config.backend.mock_perfect = true;
  config.k_values = {0, 3};

  // cap the window just above the longest k=0 prompt: k=0 fits, k=3 cannot
  {
    const Corpus corpus = load_corpus(config.corpus_path, config.corpus);
    const auto labels = labels_for_corpus(corpus);
    const Datastore empty_store;
    size_t max_len = 0;
    for (const auto& t : corpus.test) {
      max_len = std::max(
          max_len, render_chatml(build_prompt(t, {}, empty_store,
                                              Condition::kPivot, labels))
                       .size());
    }
    config.backend.mock_max_prompt_chars = max_len + 1;
  }

  Experiment experiment(config);
  const auto result = experiment.run_ablation();
  REQUIRE(result.cells.size() == 2);
  CHECK(result.cells[0].row.n_context_overflows == 0);
  CHECK(result.cells[0].row.report.bleu ==
        doctest::Approx(100.0).epsilon(1e-9));
  CHECK(result.cells[1].row.n_context_overflows == 8);
  CHECK(result.cells[1].row.n_errors == 8);
  CHECK(result.cells[1].row.report.bleu == 0.0);  // scored as empty, honest
  for (const auto& seg : result.cells[1].segments) {
    CHECK(seg.context_overflow);
    CHECK(seg.hypothesis.empty());
  }
}

TEST_CASE("transport failure aborts the cell but later rows continue") {
  testutil::TempDir tmp("runner_abort");
  auto config = synthetic_config(tmp.path());
  // replay with an empty fixture: every lookup is a miss (transport-class)
  const auto fixture = tmp.path() / "empty.jsonl";
  io::write_file_atomic(fixture.string(), "");
  config.backend.kind = "replay";
  config.backend.replay_fixture = fixture.string();
  config.k_values = {0, 1};

  Experiment experiment(config);
  const auto result = experiment.run_ablation();
  REQUIRE(result.cells.size() == 2);
  CHECK(!result.cells[0].row.error.empty());
  CHECK(!result.cells[1].row.error.empty());
  // the rows are still present in the CSV, marked as errors
  const auto csv = ablation_csv(result);
  CHECK(csv.find("ERROR") != std::string::npos);
}

TEST_CASE("compare_systems: self-comparison and shape checks") {
  testutil::TempDir tmp("runner_compare");
  auto config = synthetic_config(tmp.path());
  config.k_values = {0, 1};
  Experiment experiment(config);
  const auto result = experiment.run_ablation();

  const auto self = compare_systems(result, result, 0, 0,
                                    BootstrapMetric::kChrfpp, 500, 11);
  CHECK(self.delta_observed == 0.0);
  CHECK(self.p_value >= 0.5);

  const auto cross = compare_systems(result, result, 0, 1,
                                     BootstrapMetric::kBleu, 500, 11);
  CHECK(cross.n_segments == 8);

  CHECK_THROWS_AS(compare_systems(result, result, 0, 99,
                                  BootstrapMetric::kBleu, 500, 11),
                  ValidationError);

  // deterministic given the seed
  const auto again = compare_systems(result, result, 0, 1,
                                     BootstrapMetric::kBleu, 500, 11);
  CHECK(cross.deltas == again.deltas);
}

TEST_CASE("result JSON round trip preserves equality") {
  testutil::TempDir tmp("runner_json");
  auto config = synthetic_config(tmp.path());
  config.k_values = {0, 2};
  Experiment experiment(config);
  const auto result = experiment.run_ablation();

  const auto body = to_json_string(result);
  const auto restored = experiment_result_from_json(body);
  CHECK(restored == result);
  CHECK(to_json_string(restored) == body);
}

TEST_CASE("emit_report writes csv/json/summary; empty results are valid") {
  testutil::TempDir tmp("runner_emit");
  auto config = synthetic_config(tmp.path());
  config.k_values = {0};
  Experiment experiment(config);
  const auto result = experiment.run_ablation();

  const auto out = std::filesystem::path(config.out_dir);
  CHECK(std::filesystem::exists(out / "result.json"));
  CHECK(std::filesystem::exists(out / "ablation.csv"));
  CHECK(std::filesystem::exists(out / "summary.txt"));

  const auto summary = io::read_file((out / "summary.txt").string());
  CHECK(summary.find(bleu_signature()) != std::string::npos);
  CHECK(summary.find(chrf_signature(6, 2)) != std::string::npos);
  CHECK(summary.find("Eng-Gom") != std::string::npos);     // NLLB constants
  CHECK(summary.find("Best k by chrF++") != std::string::npos);

  // empty result still emits a valid table
  ExperimentResult empty;
  empty.condition = Condition::kDirect;
  const auto csv = ablation_csv(empty);
  CHECK(csv == "Model,Source,Target,k,BLEU,chrF++\n");
}

TEST_CASE("analysis tables") {
  testutil::TempDir tmp("runner_analysis");
  auto config = synthetic_config(tmp.path());
  const Corpus corpus = load_corpus(config.corpus_path, config.corpus);

  SUBCASE("jaccard exact values on constructed overlap") {
    Corpus crafted;
    crafted.name = "crafted";
    crafted.source_lang = "eng";
    crafted.pivot_lang = "mar";
    crafted.target_lang = "gom";
    // src vocab {a,b,c}; piv vocab {b,c,d}; tgt vocab {x}
    crafted.train = {{0, "a b c", "b c d", "x"}};
    const auto rows = jaccard_table(crafted, NormPolicy::kFolded);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].pair == "Eng-Mar");
    CHECK(rows[0].similarity == 0.5);
    CHECK(rows[1].pair == "Eng-Gom");
    CHECK(rows[1].similarity == 0.0);
    CHECK(rows[2].pair == "Mar-Gom");
    CHECK(rows[2].similarity == 0.0);
    const auto csv = jaccard_csv(rows);
    CHECK(csv.find("Eng-Mar,0.5000") != std::string::npos);
  }

  SUBCASE("fertility with the whitespace counter is 1.0 everywhere") {
    WhitespaceTokenCounter ws;
    const auto rows = fertility_table(corpus, ws);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
      CHECK(row.fertility == 1.0);
      CHECK(row.dataset == "Gom");
    }
  }

  SUBCASE("deviation table equals direct plain-chrF calls") {
    config.k_values = {1, 2};
    Experiment experiment(config);
    const auto result = experiment.run_ablation();
    const auto rows = deviation_table(result, corpus);
    REQUIRE(rows.size() == 2);
    for (size_t i = 0; i < rows.size(); ++i) {
      const auto& cell = result.cells[i];
      std::vector<std::string> pivots;
      std::vector<std::string> hyps;
      for (const auto& seg : cell.segments) {
        for (const auto& t : corpus.test) {
          if (t.id == seg.query_id) pivots.push_back(t.pivot);
        }
        hyps.push_back(seg.hypothesis);
      }
      CHECK(rows[i].chrf == chrf(hyps, pivots, 6, 0).first);
    }
  }
}

TEST_CASE("config file parsing, digest, and overrides") {
  testutil::TempDir tmp("config");
  const std::string body = R"({
    "corpus": {"name": "k", "source_lang": "eng", "pivot_lang": "mar",
               "target_lang": "gom", "path": "c.jsonl",
               "n_train": 800, "n_test": 200, "split_seed": 17},
    "backend": {"kind": "mock", "mock_perfect": true},
    "model_id": "m",
    "condition": "pivot",
    "k_values": [0, 1, 2, 3, 4, 5],
    "sampling": {"temperature": 0.1, "max_new_tokens": 200,
                 "num_return_sequences": 1, "do_sample": true},
    "cleaning_policy": "default",
    "demo_order": "most_similar_first",
    "out_dir": "runs/x",
    "seed": 17
  })";
  const auto config = config_from_json_string(body);
  CHECK(config.corpus.name == "k");
  CHECK(config.corpus.split->n_train == 800);
  CHECK(config.condition == Condition::kPivot);
  CHECK(config.k_values == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK(config.sampling.temperature == 0.1);
  CHECK(config.sampling.max_new_tokens == 200);
  CHECK(config.reference_baselines.size() == 2);  // defaults kept

  CHECK(config_digest(config) == config_digest(config));
  auto changed = config;
  changed.seed = 18;
  CHECK(config_digest(changed) != config_digest(config));

  CHECK_THROWS_AS(config_from_json_string("{\"bogus_key\": 1}"), ParseError);
  CHECK_THROWS_AS(config_from_json_string("{\"k_values\": []}"),
                  ValidationError);
  CHECK_THROWS_AS(config_from_json_string(
                      "{\"sampling\": {\"num_return_sequences\": 2}}"),
                  ValidationError);
}
