#include <doctest/doctest.h>

#include <string>
#include <vector>

#include "diffstitch/prm.hpp"
#include "diffstitch/stitcher.hpp"
#include "test_support.hpp"

using namespace diffstitch;
using namespace diffstitch::prm;

namespace {

segmenter::StepList steps_of(const std::vector<std::string>& texts) {
  segmenter::StepList out;
  std::size_t off = 0;
  for (const std::string& t : texts) {
    out.push_back(segmenter::Step{t, off, off + t.size()});
    off += t.size() + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("insert_markers interleaves the marker after every step") {
  ScoreRequest req = insert_markers("what is 2+2", steps_of({"a", "b"}), "<m>");
  CHECK(req.body == "a<m>b<m>");
  CHECK(req.problem == "what is 2+2");
  CHECK(req.marker == "<m>");
  CHECK(req.system.find("reason step by step") != std::string::npos);

  CHECK(insert_markers("p", steps_of({}), "<m>").body.empty());
  CHECK(insert_markers("p", steps_of({"only"})).body == "only<extra_0>");
}

TEST_CASE("insert_markers rejects marker collisions") {
  CHECK(ts::thrown_kind([] {
          insert_markers("p", steps_of({"x<m>y"}), "<m>");
        }) == ErrorKind::InvalidInput);
  CHECK(ts::thrown_kind([] {
          insert_markers("the <m> problem", steps_of({"x"}), "<m>");
        }) == ErrorKind::InvalidInput);
  CHECK(ts::thrown_kind([] { insert_markers("p", steps_of({"x"}), ""); }) ==
        ErrorKind::InvalidInput);
}

TEST_CASE("extract_step_scores passes well-formed responses through") {
  CHECK(extract_step_scores({0.9, 0.4}, 2) == std::vector<double>{0.9, 0.4});
}

TEST_CASE("extract_step_scores clamps numeric noise") {
  auto out = extract_step_scores({1.0000001, 0.5, -0.0000005}, 3);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.5);
  CHECK(out[2] == 0.0);
}

TEST_CASE("extract_step_scores rejects count and range violations") {
  CHECK(ts::thrown_kind([] { extract_step_scores({0.9}, 2); }) == ErrorKind::Protocol);
  CHECK(ts::thrown_kind([] { extract_step_scores({0.9, 0.1, 0.2}, 2); }) ==
        ErrorKind::Protocol);
  CHECK(ts::thrown_kind([] { extract_step_scores({1.1}, 1); }) == ErrorKind::Protocol);
  CHECK(ts::thrown_kind([] { extract_step_scores({-0.01}, 1); }) == ErrorKind::Protocol);
}

TEST_CASE("build_step_pool orders entries by (trace, position)") {
  auto pool = build_step_pool({steps_of({"a", "b"}), steps_of({"c"})},
                              {{0.1, 0.2}, {0.3}});
  REQUIRE(pool.entries.size() == 3);
  CHECK(pool.trace_count == 2);
  CHECK(pool.trace_lengths == std::vector<std::size_t>{2, 1});
  CHECK(pool.entries[0].trace == 0);
  CHECK(pool.entries[0].position == 0);
  CHECK(pool.entries[0].text == "a");
  CHECK(pool.entries[1].position == 1);
  CHECK(pool.entries[2].trace == 1);
  CHECK(pool.entries[2].score == 0.3);
  CHECK(pool.trace_scores(0) == std::vector<double>{0.1, 0.2});
  CHECK(pool.trace_scores(1) == std::vector<double>{0.3});
}

TEST_CASE("build_step_pool handles empty inputs and rejects mismatches") {
  CHECK(build_step_pool({}, {}).entries.empty());
  auto single = build_step_pool({steps_of({"s"})}, {{0.93}});
  REQUIRE(single.entries.size() == 1);
  CHECK(single.entries[0].score == 0.93);

  CHECK(ts::thrown_kind([] {
          build_step_pool({steps_of({"a", "b"})}, {{0.1}});
        }) == ErrorKind::InvalidInput);
  CHECK(ts::thrown_kind([] {
          build_step_pool({steps_of({"a"})}, {{0.1}, {0.2}});
        }) == ErrorKind::InvalidInput);
  CHECK(ts::thrown_kind([] {
          build_step_pool({steps_of({"a"})}, {{1.5}});
        }) == ErrorKind::InvalidInput);
}

TEST_CASE("score_traces makes exactly one scorer call per non-empty trace") {
  int calls = 0;
  std::vector<std::string> bodies;
  ScorerFn scorer = [&](const ScoreRequest& req) {
    ++calls;
    bodies.push_back(req.body);
    // one probability per marker occurrence
    std::size_t markers = 0, pos = 0;
    while ((pos = req.body.find(req.marker, pos)) != std::string::npos) {
      ++markers;
      pos += req.marker.size();
    }
    return std::vector<double>(markers, 0.5);
  };

  auto pool = score_traces(scorer, "p",
                           {steps_of({"a", "b"}), steps_of({}), steps_of({"c"})});
  CHECK(calls == 2);  // the empty trace is skipped
  CHECK(pool.trace_count == 3);
  CHECK(pool.trace_lengths == std::vector<std::size_t>{2, 0, 1});
  CHECK(pool.entries.size() == 3);
  CHECK(bodies[0] == "a<extra_0>b<extra_0>");
  CHECK(bodies[1] == "c<extra_0>");
}

TEST_CASE("score_traces reproduces the worked three-step example") {
  // marker probabilities [0.9, 0.4, 0.6]: trace score is their geometric mean
  ScorerFn scorer = [](const ScoreRequest&) { return std::vector<double>{0.9, 0.4, 0.6}; };
  auto pool = score_traces(scorer, "p", {steps_of({"s1", "s2", "s3"})});
  auto scores = pool.trace_scores(0);
  CHECK(scores == std::vector<double>{0.9, 0.4, 0.6});
  CHECK(stitcher::geometric_mean(scores) == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("score_traces surfaces scorer failures as backend errors") {
  ScorerFn boom = [](const ScoreRequest&) -> std::vector<double> {
    throw std::runtime_error("socket closed");
  };
  CHECK(ts::thrown_kind([&] {
          score_traces(boom, "p", {steps_of({"a"})});
        }) == ErrorKind::Backend);

  // wrong count from the scorer is a protocol error
  ScorerFn short_resp = [](const ScoreRequest&) { return std::vector<double>{0.5}; };
  CHECK(ts::thrown_kind([&] {
          score_traces(short_resp, "p", {steps_of({"a", "b"})});
        }) == ErrorKind::Protocol);
}
