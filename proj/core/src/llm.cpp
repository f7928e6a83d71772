#include "pivotmt/llm.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "http_client.hpp"
#include "pivotmt/digest.hpp"
#include "pivotmt/errors.hpp"
#include "pivotmt/text.hpp"

namespace pivotmt {

using nlohmann::json;

std::string to_string(CleaningPolicy policy) {
  switch (policy) {
    case CleaningPolicy::kNone:
      return "none";
    case CleaningPolicy::kDefault:
      return "default";
    case CleaningPolicy::kFirstLine:
      return "first_line";
  }
  return "default";
}

CleaningPolicy cleaning_policy_from_string(const std::string& name) {
  if (name == "none") return CleaningPolicy::kNone;
  if (name == "default") return CleaningPolicy::kDefault;
  if (name == "first_line") return CleaningPolicy::kFirstLine;
  throw ValidationError("unknown cleaning policy: " + name);
}

std::string clean_hypothesis(std::string_view raw, CleaningPolicy policy) {
  if (policy == CleaningPolicy::kNone) return std::string(raw);

  std::string s(raw);
  const size_t end_marker = s.find("<|im_end|>");
  if (end_marker != std::string::npos) s.resize(end_marker);
  s = text::strip(s);

  if (policy == CleaningPolicy::kFirstLine) {
    const size_t nl = s.find('\n');
    if (nl != std::string::npos) s.resize(nl);
    return text::strip(s);
  }

  // default: cut at the first blank line
  std::string out;
  size_t pos = 0;
  bool first = true;
  while (pos <= s.size()) {
    const size_t nl = s.find('\n', pos);
    const std::string line =
        s.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (!first && text::strip(line).empty()) break;
    if (!first) out += '\n';
    out += line;
    first = false;
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::string prompt_hash(const std::string& rendered_prompt,
                        const SamplingParams& params,
                        const std::string& model_id) {
  json key;
  key["prompt"] = rendered_prompt;
  key["model"] = model_id;
  key["temperature"] = params.temperature;
  key["max_new_tokens"] = params.max_new_tokens;
  key["num_return_sequences"] = params.num_return_sequences;
  key["do_sample"] = params.do_sample;
  if (params.seed.has_value()) key["seed"] = *params.seed;
  return sha256_hex(key.dump());
}

std::string to_json_line(const GenerationRecord& r) {
  json rec;
  rec["query_id"] = r.query_id;
  rec["model_id"] = r.model_id;
  rec["prompt_hash"] = r.prompt_hash;
  rec["raw_output"] = r.raw_output;
  rec["hypothesis"] = r.hypothesis;
  rec["backend"] = r.backend;
  rec["timestamp"] = r.timestamp;
  return rec.dump();
}

GenerationRecord generation_record_from_json(const std::string& line) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed generation record: ") + e.what());
  }
  GenerationRecord r;
  r.query_id = rec.at("query_id").get<int64_t>();
  r.model_id = rec.at("model_id").get<std::string>();
  r.prompt_hash = rec.at("prompt_hash").get<std::string>();
  r.raw_output = rec.at("raw_output").get<std::string>();
  r.hypothesis = rec.at("hypothesis").get<std::string>();
  r.backend = rec.at("backend").get<std::string>();
  r.timestamp = rec.value("timestamp", "");
  return r;
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The final user message embeds the query source on its "Original (...)"
// line; the mock backend keys its fixture map on that text.
std::string extract_query_source(const PromptBundle& bundle) {
  if (bundle.messages.empty()) return "";
  const std::string& content = bundle.messages.back().content;
  const std::string needle = "Original (" + bundle.lang_labels.source + "): ";
  const size_t at = content.find(needle);
  if (at == std::string::npos) return "";
  const size_t begin = at + needle.size();
  const size_t end = content.find('\n', begin);
  return content.substr(begin,
                        end == std::string::npos ? std::string::npos
                                                 : end - begin);
}

}  // namespace

MockBackend::MockBackend(
    std::unordered_map<std::string, std::string> source_to_output,
    size_t max_prompt_chars)
    : source_to_output_(std::move(source_to_output)),
      max_prompt_chars_(max_prompt_chars) {}

std::string MockBackend::generate_raw(const PromptBundle& bundle,
                                      const SamplingParams& params,
                                      const std::string& model_id) {
  const std::string rendered = render_chatml(bundle);
  if (max_prompt_chars_ > 0 && rendered.size() > max_prompt_chars_) {
    throw ContextOverflowError("mock context window exceeded: " +
                               std::to_string(rendered.size()) + " > " +
                               std::to_string(max_prompt_chars_) + " chars");
  }
  const std::string source = extract_query_source(bundle);
  const auto it = source_to_output_.find(source);
  if (it != source_to_output_.end()) return it->second;
  return "mock-" + prompt_hash(rendered, params, model_id).substr(0, 16);
}

ReplayBackend::ReplayBackend(const std::string& fixture_path) {
  std::ifstream in(fixture_path, std::ios::binary);
  if (!in) throw IoError("cannot open replay fixture: " + fixture_path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::strip(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(fixture_path + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
    outputs_[rec.at("prompt_hash").get<std::string>()] =
        rec.at("raw_output").get<std::string>();
  }
}

std::string ReplayBackend::generate_raw(const PromptBundle& bundle,
                                        const SamplingParams& params,
                                        const std::string& model_id) {
  const std::string hash =
      prompt_hash(render_chatml(bundle), params, model_id);
  const auto it = outputs_.find(hash);
  if (it == outputs_.end()) {
    throw ReplayMissError("no recorded output for prompt hash " + hash +
                          " (query id " + std::to_string(bundle.query_id) +
                          ")");
  }
  return it->second;
}

struct LiveBackend::Impl {
  detail::HttpConfig http;
};

LiveBackend::LiveBackend(LiveEndpointConfig config)
    : impl_(new Impl{{config.base_url, config.api_key, config.timeout_sec,
                      config.max_retries, config.backoff_ms}}) {}

LiveBackend::~LiveBackend() = default;

std::string LiveBackend::generate_raw(const PromptBundle& bundle,
                                      const SamplingParams& params,
                                      const std::string& model_id) {
  json messages = json::array();
  for (const auto& msg : bundle.messages) {
    messages.push_back({{"role", to_string(msg.role)},
                        {"content", msg.content}});
  }
  json body;
  body["model"] = model_id;
  body["messages"] = std::move(messages);
  body["temperature"] = params.temperature;
  body["max_tokens"] = params.max_new_tokens;
  if (params.seed.has_value()) body["seed"] = *params.seed;

  const auto res =
      detail::post_json(impl_->http, "/v1/chat/completions", body);
  try {
    return res.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("chat response missing "
                                     "choices[0].message.content: ") +
                         e.what());
  }
}

GenerationRecord generate(GenerationBackend& backend,
                          const PromptBundle& bundle,
                          const SamplingParams& params,
                          const std::string& model_id,
                          CleaningPolicy policy) {
  if (params.num_return_sequences != 1) {
    throw ValidationError("num_return_sequences must be 1");
  }
  if (params.max_new_tokens < 1) {
    throw ValidationError("max_new_tokens must be >= 1");
  }
  GenerationRecord record;
  record.query_id = bundle.query_id;
  record.model_id = model_id;
  record.prompt_hash = prompt_hash(render_chatml(bundle), params, model_id);
  record.raw_output = backend.generate_raw(bundle, params, model_id);
  record.hypothesis = clean_hypothesis(record.raw_output, policy);
  record.backend = backend.kind();
  record.timestamp = utc_timestamp();
  return record;
}

struct GenerationCache::State {
  mutable std::shared_mutex mutex;
  std::unordered_map<std::string, GenerationRecord> records;
  std::ofstream appender;
};

GenerationCache::GenerationCache(const std::string& run_dir)
    : state_(std::make_shared<State>()) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  file_path_ = (fs::path(run_dir) / "generations.jsonl").string();

  if (fs::exists(file_path_)) {
    std::ifstream in(file_path_, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (text::strip(line).empty()) continue;
      auto record = generation_record_from_json(line);
      state_->records[record.prompt_hash] = std::move(record);
    }
  }
  state_->appender.open(file_path_, std::ios::binary | std::ios::app);
  if (!state_->appender) {
    throw IoError("cannot open generation cache for append: " + file_path_);
  }
}

std::optional<GenerationRecord> GenerationCache::get(
    const std::string& prompt_hash) const {
  std::shared_lock lock(state_->mutex);
  const auto it = state_->records.find(prompt_hash);
  if (it == state_->records.end()) return std::nullopt;
  return it->second;
}

void GenerationCache::put(const GenerationRecord& record) {
  std::unique_lock lock(state_->mutex);
  const auto [it, inserted] =
      state_->records.emplace(record.prompt_hash, record);
  if (!inserted) return;  // append-only; first write wins
  state_->appender << to_json_line(record) << "\n";
  state_->appender.flush();
  if (!state_->appender) {
    throw IoError("generation cache write failed: " + file_path_);
  }
}

size_t GenerationCache::size() const {
  std::shared_lock lock(state_->mutex);
  return state_->records.size();
}

std::vector<GenerationOutcome> generate_all(
    GenerationBackend& backend, std::span<const PromptBundle> bundles,
    const SamplingParams& params, const std::string& model_id,
    CleaningPolicy policy, GenerationCache* cache, int parallelism) {
  std::vector<GenerationOutcome> outcomes(bundles.size());
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= bundles.size()) return;
      auto& outcome = outcomes[i];
      try {
        const std::string hash =
            prompt_hash(render_chatml(bundles[i]), params, model_id);
        if (cache != nullptr) {
          if (auto hit = cache->get(hash)) {
            outcome.record = std::move(hit);
            outcome.from_cache = true;
            continue;
          }
        }
        auto record = generate(backend, bundles[i], params, model_id, policy);
        if (cache != nullptr) cache->put(record);
        outcome.record = std::move(record);
      } catch (const ContextOverflowError& e) {
        outcome.error_kind = GenerationErrorKind::kContextOverflow;
        outcome.error = e.what();
      } catch (const std::exception& e) {
        outcome.error_kind = GenerationErrorKind::kTransport;
        outcome.error = e.what();
      }
    }
  };

  const size_t n_threads = std::max(1, parallelism);
  if (n_threads <= 1 || bundles.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(std::min(n_threads, bundles.size()));
    for (size_t i = 0; i < std::min(n_threads, bundles.size()); ++i) {
      threads.emplace_back(worker);
    }
    for (auto& t : threads) t.join();
  }
  return outcomes;
}

}  // namespace pivotmt
