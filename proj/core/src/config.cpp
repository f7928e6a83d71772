#include "pivotmt/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "pivotmt/digest.hpp"
#include "pivotmt/errors.hpp"
#include "pivotmt/io_util.hpp"
#include "pivotmt/text.hpp"

namespace pivotmt {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& section) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw ParseError("config: unknown key '" + key + "' in " + section);
    }
  }
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : fallback;
}

CorpusDescriptor parse_corpus_section(const json& c, std::string* path_out) {
  reject_unknown_keys(c,
                      {"name", "source_lang", "pivot_lang", "target_lang",
                       "path", "train_file", "test_file", "n_train", "n_test",
                       "split_seed"},
                      "corpus");
  CorpusDescriptor d;
  d.name = c.value("name", "");
  d.source_lang = c.value("source_lang", "eng");
  d.pivot_lang = c.value("pivot_lang", "");
  d.target_lang = c.value("target_lang", "");
  *path_out = c.value("path", "");
  if (c.contains("train_file") || c.contains("test_file")) {
    d.files = PreSplitFiles{c.value("train_file", ""), c.value("test_file", "")};
  } else if (c.contains("n_train") || c.contains("n_test")) {
    d.split = SeededSplit{c.value("n_train", int64_t{0}),
                          c.value("n_test", int64_t{0}),
                          c.value("split_seed", uint64_t{0})};
  }
  return d;
}

}  // namespace

ExperimentConfig config_from_json_string(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown_keys(
      j,
      {"corpus", "lang_labels", "datastore_path", "embedding", "backend",
       "model_id", "condition", "k_values", "sampling", "cleaning_policy",
       "demo_order", "out_dir", "seed", "generation_parallelism",
       "reference_baselines"},
      "top level");

  ExperimentConfig config;
  if (j.contains("corpus")) {
    config.corpus = parse_corpus_section(j["corpus"], &config.corpus_path);
  }
  if (j.contains("lang_labels")) {
    config.lang_labels =
        j["lang_labels"].get<std::map<std::string, std::string>>();
  }
  config.datastore_path = j.value("datastore_path", "");

  if (j.contains("embedding")) {
    const auto& e = j["embedding"];
    reject_unknown_keys(e,
                        {"provider", "base_url", "model", "batch_size",
                         "parallelism", "timeout_sec", "max_retries"},
                        "embedding");
    config.embedding.provider = e.value("provider", "hashed-bow");
    config.embedding.base_url = e.value("base_url", "");
    config.embedding.model = e.value("model", "");
    config.embedding.batch_size = e.value("batch_size", size_t{32});
    config.embedding.parallelism = e.value("parallelism", 1);
    config.embedding.timeout_sec = e.value("timeout_sec", 60);
    config.embedding.max_retries = e.value("max_retries", 3);
  }

  if (j.contains("backend")) {
    const auto& b = j["backend"];
    reject_unknown_keys(b,
                        {"kind", "base_url", "api_key", "timeout_sec",
                         "max_retries", "backoff_ms", "replay_fixture",
                         "mock_perfect", "mock_map_file",
                         "mock_max_prompt_chars"},
                        "backend");
    config.backend.kind = b.value("kind", "mock");
    config.backend.base_url = b.value("base_url", "");
    config.backend.api_key = b.value("api_key", "");
    config.backend.timeout_sec = b.value("timeout_sec", 120);
    config.backend.max_retries = b.value("max_retries", 3);
    config.backend.backoff_ms = b.value("backoff_ms", 500);
    config.backend.replay_fixture = b.value("replay_fixture", "");
    config.backend.mock_perfect = b.value("mock_perfect", false);
    config.backend.mock_map_file = b.value("mock_map_file", "");
    config.backend.mock_max_prompt_chars =
        b.value("mock_max_prompt_chars", size_t{0});
  }

  config.model_id = j.value("model_id", "mock-model");
  if (j.contains("condition")) {
    config.condition = condition_from_string(j["condition"].get<std::string>());
  }
  if (j.contains("k_values")) {
    config.k_values = j["k_values"].get<std::vector<int>>();
  }
  if (config.k_values.empty()) {
    throw ValidationError("config: k_values must be non-empty");
  }
  for (int k : config.k_values) {
    if (k < 0) throw ValidationError("config: k_values entries must be >= 0");
  }

  if (j.contains("sampling")) {
    const auto& s = j["sampling"];
    reject_unknown_keys(s,
                        {"temperature", "max_new_tokens",
                         "num_return_sequences", "do_sample", "seed"},
                        "sampling");
    config.sampling.temperature = s.value("temperature", 0.1);
    config.sampling.max_new_tokens = s.value("max_new_tokens", 200);
    config.sampling.num_return_sequences = s.value("num_return_sequences", 1);
    config.sampling.do_sample = s.value("do_sample", true);
    if (s.contains("seed") && !s["seed"].is_null()) {
      config.sampling.seed = s["seed"].get<int64_t>();
    }
  }
  if (config.sampling.temperature < 0.0) {
    throw ValidationError("config: temperature must be >= 0");
  }
  if (config.sampling.num_return_sequences != 1) {
    throw ValidationError("config: num_return_sequences must be 1");
  }
  if (config.sampling.max_new_tokens < 1) {
    throw ValidationError("config: max_new_tokens must be >= 1");
  }

  if (j.contains("cleaning_policy")) {
    config.cleaning =
        cleaning_policy_from_string(j["cleaning_policy"].get<std::string>());
  }
  if (j.contains("demo_order")) {
    const auto order = j["demo_order"].get<std::string>();
    if (order == "most_similar_first") {
      config.demo_order = DemoOrder::kMostSimilarFirst;
    } else if (order == "most_similar_last") {
      config.demo_order = DemoOrder::kMostSimilarLast;
    } else {
      throw ParseError("config: unknown demo_order '" + order + "'");
    }
  }
  config.out_dir = j.value("out_dir", "runs/default");
  config.seed = j.value("seed", uint64_t{0});
  config.generation_parallelism = j.value("generation_parallelism", 4);

  if (j.contains("reference_baselines")) {
    config.reference_baselines.clear();
    for (const auto& rb : j["reference_baselines"]) {
      config.reference_baselines.push_back({rb.at("pair").get<std::string>(),
                                            rb.at("bleu").get<double>(),
                                            rb.at("chrfpp").get<double>()});
    }
  }

  // environment fills empty endpoint settings
  config.backend.base_url = config.backend.base_url.empty()
                                ? env_or("PIVOTMT_BASE_URL", "")
                                : config.backend.base_url;
  config.backend.api_key = config.backend.api_key.empty()
                               ? env_or("PIVOTMT_API_KEY", "")
                               : config.backend.api_key;
  if (config.embedding.base_url.empty()) {
    config.embedding.base_url = config.backend.base_url;
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_json_string(io::read_file(path));
}

std::string to_json_string(const ExperimentConfig& config) {
  json j;
  json c;
  c["name"] = config.corpus.name;
  c["source_lang"] = config.corpus.source_lang;
  c["pivot_lang"] = config.corpus.pivot_lang;
  c["target_lang"] = config.corpus.target_lang;
  c["path"] = config.corpus_path;
  if (config.corpus.files) {
    c["train_file"] = config.corpus.files->train_file;
    c["test_file"] = config.corpus.files->test_file;
  }
  if (config.corpus.split) {
    c["n_train"] = config.corpus.split->n_train;
    c["n_test"] = config.corpus.split->n_test;
    c["split_seed"] = config.corpus.split->seed;
  }
  j["corpus"] = std::move(c);
  if (!config.lang_labels.empty()) j["lang_labels"] = config.lang_labels;
  j["datastore_path"] = config.datastore_path;
  j["embedding"] = {{"provider", config.embedding.provider},
                    {"base_url", config.embedding.base_url},
                    {"model", config.embedding.model},
                    {"batch_size", config.embedding.batch_size},
                    {"parallelism", config.embedding.parallelism},
                    {"timeout_sec", config.embedding.timeout_sec},
                    {"max_retries", config.embedding.max_retries}};
  j["backend"] = {{"kind", config.backend.kind},
                  {"base_url", config.backend.base_url},
                  {"timeout_sec", config.backend.timeout_sec},
                  {"max_retries", config.backend.max_retries},
                  {"backoff_ms", config.backend.backoff_ms},
                  {"replay_fixture", config.backend.replay_fixture},
                  {"mock_perfect", config.backend.mock_perfect},
                  {"mock_map_file", config.backend.mock_map_file},
                  {"mock_max_prompt_chars", config.backend.mock_max_prompt_chars}};
  j["model_id"] = config.model_id;
  j["condition"] = to_string(config.condition);
  j["k_values"] = config.k_values;
  json s;
  s["temperature"] = config.sampling.temperature;
  s["max_new_tokens"] = config.sampling.max_new_tokens;
  s["num_return_sequences"] = config.sampling.num_return_sequences;
  s["do_sample"] = config.sampling.do_sample;
  if (config.sampling.seed) s["seed"] = *config.sampling.seed;
  j["sampling"] = std::move(s);
  j["cleaning_policy"] = to_string(config.cleaning);
  j["demo_order"] = config.demo_order == DemoOrder::kMostSimilarFirst
                        ? "most_similar_first"
                        : "most_similar_last";
  j["out_dir"] = config.out_dir;
  j["seed"] = config.seed;
  j["generation_parallelism"] = config.generation_parallelism;
  json baselines = json::array();
  for (const auto& rb : config.reference_baselines) {
    baselines.push_back(
        {{"pair", rb.pair}, {"bleu", rb.bleu}, {"chrfpp", rb.chrfpp}});
  }
  j["reference_baselines"] = std::move(baselines);
  return j.dump(2);
}

std::string config_digest(const ExperimentConfig& config) {
  // Digest over the semantic inputs only: where outputs land and how many
  // workers ran must not change the experiment's identity. The api_key
  // never enters serialized configs at all.
  auto j = json::parse(to_json_string(config));
  j.erase("out_dir");
  j.erase("generation_parallelism");
  return sha256_hex(j.dump());
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const ExperimentConfig& config) {
  if (config.embedding.provider == "hashed-bow") {
    return std::make_unique<HashedBowProvider>();
  }
  if (config.embedding.provider == "http") {
    if (config.embedding.base_url.empty()) {
      throw ValidationError(
          "http embedding provider needs embedding.base_url or "
          "PIVOTMT_BASE_URL");
    }
    return std::make_unique<HttpEmbeddingProvider>(
        config.embedding.base_url, config.embedding.model,
        config.backend.api_key, config.embedding.timeout_sec,
        config.embedding.max_retries);
  }
  throw ValidationError("unknown embedding provider: " +
                        config.embedding.provider);
}

std::unique_ptr<GenerationBackend> make_backend(const ExperimentConfig& config,
                                                const Corpus& corpus) {
  if (config.backend.kind == "mock") {
    std::unordered_map<std::string, std::string> map;
    if (config.backend.mock_perfect) {
      for (const auto& t : corpus.test) map[t.source] = t.target;
    }
    if (!config.backend.mock_map_file.empty()) {
      std::ifstream in(config.backend.mock_map_file, std::ios::binary);
      if (!in) {
        throw IoError("cannot open mock map file: " +
                      config.backend.mock_map_file);
      }
      std::string line;
      while (std::getline(in, line)) {
        if (text::strip(line).empty()) continue;
        const auto rec = json::parse(line);
        map[rec.at("src").get<std::string>()] =
            rec.at("out").get<std::string>();
      }
    }
    return std::make_unique<MockBackend>(std::move(map),
                                         config.backend.mock_max_prompt_chars);
  }
  if (config.backend.kind == "replay") {
    if (config.backend.replay_fixture.empty()) {
      throw ValidationError("replay backend needs backend.replay_fixture");
    }
    return std::make_unique<ReplayBackend>(config.backend.replay_fixture);
  }
  if (config.backend.kind == "live") {
    if (config.backend.base_url.empty()) {
      throw ValidationError(
          "live backend needs backend.base_url or PIVOTMT_BASE_URL");
    }
    return std::make_unique<LiveBackend>(LiveEndpointConfig{
        config.backend.base_url, config.backend.api_key,
        config.backend.timeout_sec, config.backend.max_retries,
        config.backend.backoff_ms});
  }
  throw ValidationError("unknown backend kind: " + config.backend.kind);
}

}  // namespace pivotmt
