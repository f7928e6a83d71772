#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "pivotmt/errors.hpp"
#include "pivotmt/io_util.hpp"
#include "pivotmt/llm.hpp"
#include "test_util.hpp"

using namespace pivotmt;

namespace {

PromptBundle bundle_for(const std::string& source, int64_t id = 1) {
  PromptBundle bundle;
  bundle.query_id = id;
  bundle.lang_labels = {"English", "Marathi", "Konkani"};
  bundle.messages = {{Role::kUser,
                      "instruction\nOriginal (English): " + source +
                          "\nTranslation (Konkani):"}};
  return bundle;
}

}  // namespace

TEST_CASE("clean_hypothesis policies") {
  SUBCASE("default") {
    const auto policy = CleaningPolicy::kDefault;
    CHECK(clean_hypothesis("foo<|im_end|>junk", policy) == "foo");
    CHECK(clean_hypothesis("  bar  ", policy) == "bar");
    CHECK(clean_hypothesis("line1\n\nNote: stuff", policy) == "line1");
    CHECK(clean_hypothesis("line1\nline2\n\ntail", policy) == "line1\nline2");
    CHECK(clean_hypothesis("", policy) == "");
    CHECK(clean_hypothesis("   ", policy) == "");
    CHECK(clean_hypothesis("a\n \t \nb", policy) == "a");
    // blank lines inside get trimmed away when leading
    CHECK(clean_hypothesis("\n\nfoo", policy) == "foo");
  }
  SUBCASE("none is the identity") {
    CHECK(clean_hypothesis("  x<|im_end|>y\n\nz ", CleaningPolicy::kNone) ==
          "  x<|im_end|>y\n\nz ");
  }
  SUBCASE("first_line") {
    CHECK(clean_hypothesis("a b c\nsecond", CleaningPolicy::kFirstLine) ==
          "a b c");
    CHECK(clean_hypothesis("  one  ", CleaningPolicy::kFirstLine) == "one");
    CHECK(clean_hypothesis("x<|im_end|>\nrest", CleaningPolicy::kFirstLine) ==
          "x");
  }
  SUBCASE("idempotence and no-growth") {
    const std::string inputs[] = {
        "foo<|im_end|>junk", "  bar  ", "line1\n\nnote", "", "a\nb\nc",
        "trailing \n", "\n\n\n", "mixed  <|im_end|>", "नमस्ते\n\nworld"};
    for (const auto policy :
         {CleaningPolicy::kNone, CleaningPolicy::kDefault,
          CleaningPolicy::kFirstLine}) {
      for (const auto& raw : inputs) {
        const auto once = clean_hypothesis(raw, policy);
        CHECK(clean_hypothesis(once, policy) == once);
        CHECK(once.size() <= raw.size());
      }
    }
  }
  SUBCASE("names round trip") {
    for (const auto policy :
         {CleaningPolicy::kNone, CleaningPolicy::kDefault,
          CleaningPolicy::kFirstLine}) {
      CHECK(cleaning_policy_from_string(to_string(policy)) == policy);
    }
    CHECK_THROWS_AS(cleaning_policy_from_string("bogus"), ValidationError);
  }
}

TEST_CASE("prompt hash is stable and distinguishes inputs") {
  const SamplingParams params;
  const auto h1 = prompt_hash("prompt", params, "model-a");
  CHECK(h1 == prompt_hash("prompt", params, "model-a"));
  CHECK(h1 != prompt_hash("prompt2", params, "model-a"));
  CHECK(h1 != prompt_hash("prompt", params, "model-b"));

  SamplingParams hotter = params;
  hotter.temperature = 0.9;
  CHECK(h1 != prompt_hash("prompt", hotter, "model-a"));

  SamplingParams seeded = params;
  seeded.seed = 7;
  CHECK(h1 != prompt_hash("prompt", seeded, "model-a"));
}

TEST_CASE("mock backend is a pure function of the bundle") {
  MockBackend mock(
      std::unordered_map<std::string, std::string>{{"hello", "TARGET"}});
  const SamplingParams params;

  const auto r1 = generate(mock, bundle_for("hello"), params, "m");
  const auto r2 = generate(mock, bundle_for("hello"), params, "m");
  CHECK(r1.raw_output == "TARGET");
  CHECK(r1.hypothesis == "TARGET");
  CHECK(r1.backend == "mock");
  // identical modulo timestamp
  auto r2_stamped = r2;
  r2_stamped.timestamp = r1.timestamp;
  CHECK(r1 == r2_stamped);

  // unknown source: deterministic digest-derived string
  const auto u1 = generate(mock, bundle_for("unknown"), params, "m");
  const auto u2 = generate(mock, bundle_for("unknown"), params, "m");
  CHECK(u1.raw_output == u2.raw_output);
  CHECK(u1.raw_output.rfind("mock-", 0) == 0);
}

TEST_CASE("mock context window raises the distinct error") {
  MockBackend tight(std::unordered_map<std::string, std::string>{}, 40);
  const SamplingParams params;
  CHECK_THROWS_AS(
      generate(tight, bundle_for("a very long source that overflows"), params,
               "m"),
      ContextOverflowError);
}

TEST_CASE("sampling invariants are enforced") {
  MockBackend mock;
  SamplingParams bad;
  bad.num_return_sequences = 2;
  CHECK_THROWS_AS(generate(mock, bundle_for("x"), bad, "m"), ValidationError);
  bad = {};
  bad.max_new_tokens = 0;
  CHECK_THROWS_AS(generate(mock, bundle_for("x"), bad, "m"), ValidationError);
}

TEST_CASE("replay backend returns recorded bytes and misses loudly") {
  testutil::TempDir tmp("replay");
  const SamplingParams params;
  const auto bundle = bundle_for("recorded query");
  const auto hash = prompt_hash(render_chatml(bundle), params, "m");

  const auto fixture = tmp.path() / "fixture.jsonl";
  {
    std::ofstream out(fixture);
    nlohmann::json rec;
    rec["prompt_hash"] = hash;
    rec["raw_output"] = "recorded outputé bytes";
    out << rec.dump() << "\n";
  }
  ReplayBackend replay(fixture.string());
  CHECK(replay.size() == 1);
  const auto r = generate(replay, bundle, params, "m");
  CHECK(r.raw_output == "recorded outputé bytes");
  CHECK(r.backend == "replay");

  CHECK_THROWS_AS(generate(replay, bundle_for("never recorded"), params, "m"),
                  ReplayMissError);
  CHECK_THROWS_AS(ReplayBackend((tmp.path() / "missing.jsonl").string()),
                  IoError);
}

TEST_CASE("generation record serialization round trip") {
  GenerationRecord r;
  r.query_id = 42;
  r.model_id = "model";
  r.prompt_hash = "abc123";
  r.raw_output = "raw \"quoted\" नमस्ते\noutput";
  r.hypothesis = "clean";
  r.backend = "mock";
  r.timestamp = "2025-01-01T00:00:00Z";
  CHECK(generation_record_from_json(to_json_line(r)) == r);
}

TEST_CASE("generation cache: get-after-put, reload, unknown hash") {
  testutil::TempDir tmp("cache");

  GenerationRecord r;
  r.query_id = 7;
  r.model_id = "m";
  r.prompt_hash = "hash-7";
  r.raw_output = "out";
  r.hypothesis = "out";
  r.backend = "mock";
  r.timestamp = "2025-01-01T00:00:00Z";

  {
    GenerationCache cache(tmp.path().string());
    CHECK(!cache.get("hash-7").has_value());
    cache.put(r);
    const auto got = cache.get("hash-7");
    REQUIRE(got.has_value());
    CHECK(*got == r);
    CHECK(cache.size() == 1);
    cache.put(r);  // idempotent
    CHECK(cache.size() == 1);
  }
  // records survive a reopen (resumability)
  GenerationCache reopened(tmp.path().string());
  CHECK(reopened.size() == 1);
  const auto got = reopened.get("hash-7");
  REQUIRE(got.has_value());
  CHECK(*got == r);
  CHECK(!reopened.get("unknown").has_value());
}

TEST_CASE("generate_all: cache short-circuits the backend") {
  testutil::TempDir tmp("genall");

  struct Counting final : GenerationBackend {
    int calls = 0;
    std::string generate_raw(const PromptBundle& bundle,
                             const SamplingParams&,
                             const std::string&) override {
      ++calls;
      return "output for " + std::to_string(bundle.query_id);
    }
    std::string kind() const override { return "mock"; }
  } backend;

  std::vector<PromptBundle> bundles;
  for (int i = 0; i < 6; ++i) {
    bundles.push_back(bundle_for("query " + std::to_string(i), i));
  }
  const SamplingParams params;

  GenerationCache cache(tmp.path().string());
  const auto first = generate_all(backend, bundles, params, "m",
                                  CleaningPolicy::kDefault, &cache, 2);
  CHECK(backend.calls == 6);
  for (const auto& o : first) {
    REQUIRE(o.record.has_value());
    CHECK(o.error_kind == GenerationErrorKind::kNone);
    CHECK(!o.from_cache);
  }
  // order preserved
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].record->query_id == static_cast<int64_t>(i));
  }

  const auto second = generate_all(backend, bundles, params, "m",
                                   CleaningPolicy::kDefault, &cache, 2);
  CHECK(backend.calls == 6);  // zero new requests
  for (size_t i = 0; i < second.size(); ++i) {
    CHECK(second[i].from_cache);
    CHECK(second[i].record->hypothesis == first[i].record->hypothesis);
  }
}

TEST_CASE("generate_all records per-bundle errors without stopping") {
  struct Flaky final : GenerationBackend {
    std::string generate_raw(const PromptBundle& bundle, const SamplingParams&,
                             const std::string&) override {
      if (bundle.query_id == 1) throw ContextOverflowError("too long");
      if (bundle.query_id == 2) throw TransportError("connection refused");
      return "ok";
    }
    std::string kind() const override { return "mock"; }
  } backend;

  std::vector<PromptBundle> bundles = {bundle_for("a", 0), bundle_for("b", 1),
                                       bundle_for("c", 2)};
  const auto outcomes = generate_all(backend, bundles, SamplingParams{}, "m",
                                     CleaningPolicy::kDefault, nullptr, 1);
  CHECK(outcomes[0].error_kind == GenerationErrorKind::kNone);
  CHECK(outcomes[1].error_kind == GenerationErrorKind::kContextOverflow);
  CHECK(outcomes[2].error_kind == GenerationErrorKind::kTransport);
  CHECK(!outcomes[1].record.has_value());
}
