#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pivotmt/errors.hpp"
#include "pivotmt/metrics.hpp"
#include "pivotmt/stats.hpp"

using namespace pivotmt;

namespace {

struct ToyCorpus {
  std::vector<BleuSegmentStats> a;
  std::vector<BleuSegmentStats> b;
};

// Three paired segments where system A is better on two and worse on one.
ToyCorpus toy() {
  const std::vector<std::string> refs = {
      "the cat sat on the mat today fine",
      "a quick brown fox jumps over dogs",
      "all good things come to an end"};
  const std::vector<std::string> a_hyps = {
      "the cat sat on the mat today fine",
      "a quick brown fox jumps over cats",
      "all bad things come to an end"};
  const std::vector<std::string> b_hyps = {
      "the dog sat on a mat yesterday",
      "a quick brown fox jumps over dogs",
      "few good things come to some end"};
  ToyCorpus t;
  t.a = corpus_bleu(a_hyps, refs).second;
  t.b = corpus_bleu(b_hyps, refs).second;
  return t;
}

// Exact probability of "not better" by enumerating every equally likely
// index triple (the sampling machinery's oracle).
double exact_p_not_better(const ToyCorpus& t, bool swapped) {
  int count = 0;
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 3; ++j) {
      for (size_t k = 0; k < 3; ++k) {
        BleuCorpusSums sa;
        BleuCorpusSums sb;
        for (size_t idx : {i, j, k}) {
          sa.add(t.a[idx]);
          sb.add(t.b[idx]);
        }
        const double delta = bleu_from_sums(sa) - bleu_from_sums(sb);
        const double oriented = swapped ? -delta : delta;
        if (oriented <= 0.0) ++count;
      }
    }
  }
  return static_cast<double>(count) / 27.0;
}

}  // namespace

TEST_CASE("toy corpus p-value matches exact enumeration") {
  const auto t = toy();
  const auto report = paired_bootstrap(t.a, t.b, 10000, 99);
  const bool swapped = report.delta_observed < 0.0;
  const double exact = exact_p_not_better(t, swapped);
  CHECK(std::abs(report.p_value - exact) <= 0.02);
  CHECK(report.n_segments == 3);
  CHECK(report.n_resamples == 10000);
  CHECK(report.deltas.size() == 10000);
}

TEST_CASE("identical systems: delta 0, p at the top of the scale") {
  const auto t = toy();
  const auto report = paired_bootstrap(t.a, t.a, 2000, 5);
  CHECK(report.delta_observed == 0.0);
  CHECK(report.p_value >= 0.5);
  CHECK(report.p_value == 1.0);  // every resampled delta is exactly 0
}

TEST_CASE("determinism: same seed, bit-identical report") {
  const auto t = toy();
  const auto r1 = paired_bootstrap(t.a, t.b, 3000, 1234);
  const auto r2 = paired_bootstrap(t.a, t.b, 3000, 1234);
  CHECK(r1.delta_observed == r2.delta_observed);
  CHECK(r1.p_value == r2.p_value);
  CHECK(r1.deltas == r2.deltas);
  CHECK(to_json_string(r1) == to_json_string(r2));

  const auto r3 = paired_bootstrap(t.a, t.b, 3000, 1235);
  CHECK(r1.deltas != r3.deltas);
}

TEST_CASE("p-value bounds and swap negation") {
  const auto t = toy();
  const auto ab = paired_bootstrap(t.a, t.b, 500, 42);
  const auto ba = paired_bootstrap(t.b, t.a, 500, 42);
  CHECK(ab.delta_observed == -ba.delta_observed);
  CHECK(ab.p_value >= 1.0 / 501.0);
  CHECK(ab.p_value <= 1.0);
  CHECK(ba.p_value >= 1.0 / 501.0);
  CHECK(ba.p_value <= 1.0);
  CHECK(ab.direction != ba.direction);
}

TEST_CASE("delta_observed equals the full-corpus metric difference") {
  const auto t = toy();
  BleuCorpusSums sa;
  BleuCorpusSums sb;
  for (const auto& s : t.a) sa.add(s);
  for (const auto& s : t.b) sb.add(s);
  const double expected = bleu_from_sums(sa) - bleu_from_sums(sb);
  const auto report = paired_bootstrap(t.a, t.b, 10, 0);
  CHECK(report.delta_observed == expected);
}

TEST_CASE("chrF bootstrap runs on chrF statistics") {
  const std::vector<std::string> refs = {"abcd efgh", "ijkl mnop", "qrst uvwx"};
  const std::vector<std::string> a_hyps = {"abcd efgh", "ijkl mnop", "zzzz"};
  const std::vector<std::string> b_hyps = {"abcd", "wxyz", "qqqq"};
  const auto a = chrf(a_hyps, refs).second;
  const auto b = chrf(b_hyps, refs).second;

  const auto report = paired_bootstrap(a, b, 2000, 7);
  CHECK(report.metric == BootstrapMetric::kChrfpp);
  CHECK(report.delta_observed ==
        chrf(a_hyps, refs).first - chrf(b_hyps, refs).first);
  CHECK(report.p_value >= 1.0 / 2001.0);
  CHECK(report.p_value <= 1.0);

  // identical seeds -> bit identical
  const auto again = paired_bootstrap(a, b, 2000, 7);
  CHECK(report.deltas == again.deltas);
}

TEST_CASE("validation errors") {
  const auto t = toy();
  std::vector<BleuSegmentStats> short_list(t.a.begin(), t.a.begin() + 2);
  CHECK_THROWS_AS(paired_bootstrap(t.a, short_list, 100, 0), ValidationError);
  CHECK_THROWS_AS(paired_bootstrap(t.a, t.b, 0, 0), ValidationError);

  const std::vector<BleuSegmentStats> empty;
  CHECK_THROWS_AS(paired_bootstrap(empty, empty, 100, 0), ValidationError);

  // mismatched chrF configurations
  const std::vector<std::string> x = {"ab"};
  const std::vector<std::string> y = {"ab"};
  auto c1 = chrf(x, y, 6, 2).second;
  auto c2 = chrf(x, y, 6, 0).second;
  CHECK_THROWS_AS(paired_bootstrap(c1, c2, 10, 0), ValidationError);
}

TEST_CASE("report serialization carries every field") {
  const auto t = toy();
  const auto report = paired_bootstrap(t.a, t.b, 50, 3);
  const auto body = to_json_string(report);
  for (const char* key :
       {"metric", "delta_observed", "p_value", "n_resamples", "seed",
        "n_segments", "direction", "deltas"}) {
    CHECK(body.find(key) != std::string::npos);
  }
}
