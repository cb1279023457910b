#include <doctest/doctest.h>

#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "diffstitch/eval.hpp"
#include "diffstitch/orchestrator.hpp"
#include "test_support.hpp"

using namespace diffstitch;
using namespace diffstitch::orchestrator;

TEST_CASE("gather rebuilds the pool independent of arrival order") {
  auto partial = [](std::size_t trace, double score) {
    Partial p;
    p.trace = trace;
    p.steps = ts::make_steps(trace, 1);
    p.scores = {score};
    return p;
  };
  // arrival order [2,0,3,1] split across two workers
  std::vector<std::vector<Partial>> shuffled{{partial(2, 0.2), partial(0, 0.0)},
                                             {partial(3, 0.3), partial(1, 0.1)}};
  std::vector<std::vector<Partial>> ordered{
      {partial(0, 0.0), partial(1, 0.1), partial(2, 0.2), partial(3, 0.3)}};
  auto a = gather(shuffled, 4);
  auto b = gather(ordered, 4);
  REQUIRE(a.entries.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.entries[i].trace == b.entries[i].trace);
    CHECK(a.entries[i].trace == i);
    CHECK(a.entries[i].score == b.entries[i].score);
  }

  // single-trace passthrough
  auto single = gather({{partial(0, 0.9)}}, 1);
  CHECK(single.entries.size() == 1);
}

TEST_CASE("gather rejects duplicate, missing and out-of-range traces") {
  auto partial = [](std::size_t trace) {
    Partial p;
    p.trace = trace;
    return p;
  };
  CHECK(ts::thrown_kind([&] {
          gather({{partial(0), partial(1), partial(1)}}, 3);
        }) == ErrorKind::Aggregation);
  CHECK(ts::thrown_kind([&] { gather({{partial(0)}}, 2); }) == ErrorKind::Aggregation);
  CHECK(ts::thrown_kind([&] { gather({{partial(5)}}, 2); }) == ErrorKind::Aggregation);
}

TEST_CASE("account_steps reproduces the worked accounting example") {
  StepAccount acc = account_steps({80, 75, 78, 82}, 6, 1);
  CHECK(acc.parallel_steps == 82);
  CHECK(acc.total_steps == 315);
  CHECK(acc.combined == 89);  // 82 + 1 + 6

  StepAccount one = account_steps({100}, 0, 1);
  CHECK(one.parallel_steps == 100);
  CHECK(one.total_steps == 100);

  StepAccount equal = account_steps({32, 32, 32, 32}, 0, 0);
  CHECK(equal.parallel_steps == 32);
  CHECK(equal.total_steps == 128);

  CHECK(ts::thrown_kind([] { account_steps({}, 0, 0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("format_step_report renders parallel/solver") {
  CHECK(format_step_report(80, 6) == "80/6");
  CHECK(format_step_report(1, 0) == "1/0");
}

TEST_CASE("run_problem executes the full stitch pipeline on mocks") {
  ts::ScenarioSet set;
  set.trace_text("p1", 0, ts::math_trace({"A is 2.", "B is 3.", "So 6."}, "6"));
  set.trace_text("p1", 1, ts::math_trace({"A is 2.", "So 5."}, "5"));
  set.trace_scores("p1", 0, {0.9, 0.9, 0.95});
  set.trace_scores("p1", 1, {0.9, 0.2});
  set.completion("p1", {"From the evidence ", "\\boxed{6}"});

  auto cfg = ts::small_cfg(2, stitcher::AggregationMode::StitchPlusBest);
  RunReport r = run_problem(ts::math_problem("p1", "what is 2*3?", "6"), cfg, set.build());

  CHECK_FALSE(r.error);
  CHECK(r.answer == "6");
  CHECK(r.correct);
  CHECK(r.mode == "stitch+best");
  CHECK(r.scorer_passes == 2);
  CHECK(r.solver_invocations == 1);
  CHECK(r.solver_steps == 2);
  CHECK(r.parallel_diffusion_steps == 1);  // one-shot scenarios
  CHECK(r.total_diffusion_steps == 2);
  CHECK(r.parallel_diffusion_steps <= r.total_diffusion_steps);
}

TEST_CASE("run_problem accounts scripted multi-round traces") {
  ts::ScenarioSet set;
  // trace 0 commits in one round; trace 1 takes 4 rounds
  std::string text = ts::math_trace({"Sum is 9."}, "9");
  set.trace_text("p2", 0, text);
  set.trace_rounds("p2", 1, {text, "", "", ""}, 4);
  set.trace_scores("p2", 0, {0.9});
  set.trace_scores("p2", 1, {0.9});
  set.completion("p2", {"\\boxed{9}"});

  auto cfg = ts::small_cfg(2, stitcher::AggregationMode::StitchPlusBest);
  RunReport r = run_problem(ts::math_problem("p2", "q", "9"), cfg, set.build());
  CHECK_FALSE(r.error);
  CHECK(r.parallel_diffusion_steps == 4);
  CHECK(r.total_diffusion_steps == 5);
  CHECK(r.correct);
}

TEST_CASE("run_problem majority mode bypasses the solver") {
  ts::ScenarioSet set;
  set.trace_text("p3", 0, ts::math_trace({"Guess."}, "4"));
  set.trace_text("p3", 1, ts::math_trace({"Check."}, "5"));
  set.trace_text("p3", 2, ts::math_trace({"Sure."}, "5"));

  auto cfg = ts::small_cfg(3, stitcher::AggregationMode::MajorityVote);
  RunReport r = run_problem(ts::math_problem("p3", "q", "5"), cfg, set.build());
  CHECK_FALSE(r.error);
  CHECK(r.answer == "5");
  CHECK(r.correct);
  CHECK(r.solver_steps == 0);
  CHECK(r.solver_invocations == 0);
  CHECK(r.scorer_passes == 0);  // vote mode never scores
}

TEST_CASE("run_problem single and allcot modes skip the scorer") {
  ts::ScenarioSet set;
  set.trace_text("p4", 0, ts::math_trace({"Only step."}, "8"));
  set.trace_text("p4", 1, ts::math_trace({"Other."}, "3"));
  set.completion("p4", {"\\boxed{8}"});

  for (auto mode : {stitcher::AggregationMode::Single, stitcher::AggregationMode::AllCot}) {
    auto cfg = ts::small_cfg(2, mode);
    RunReport r = run_problem(ts::math_problem("p4", "q", "8"), cfg, set.build());
    CHECK_FALSE(r.error);
    CHECK(r.scorer_passes == 0);
    CHECK(r.solver_invocations == 1);
    CHECK(r.correct);
  }
}

TEST_CASE("run_problem skips the scorer call for zero-step traces") {
  ts::ScenarioSet set;
  set.trace_text("p5", 0, ts::math_trace({"Good step."}, "2"));
  // reasoning region empty: segmentation yields no steps
  set.trace_text("p5", 1, "<reasoning>\n\n</reasoning>\n<answer>\n\\boxed{2}\n</answer>");
  set.trace_scores("p5", 0, {0.9});
  set.completion("p5", {"\\boxed{2}"});

  auto cfg = ts::small_cfg(2, stitcher::AggregationMode::StitchPlusBest);
  RunReport r = run_problem(ts::math_problem("p5", "q", "2"), cfg, set.build());
  CHECK_FALSE(r.error);
  CHECK(r.scorer_passes == 1);
  CHECK(r.correct);
}

TEST_CASE("run_problem handles code problems with exact matching") {
  std::string code = "def add(a, b):\n    return a + b";
  ts::ScenarioSet set;
  set.trace_text("m1", 0, "```python\n" + code + "\n```");
  set.trace_scores("m1", 0, {0.9, 0.9});
  set.completion("m1", {"```python\n", code + "\n", "```"});

  Problem p;
  p.id = "m1";
  p.question = "Write a function to add two numbers.";
  p.gold_answer = code;
  p.family = prompts::Family::CodeMbpp;
  p.tests = "assert add(1, 2) == 3";
  p.exact_match = true;

  auto cfg = ts::small_cfg(1, stitcher::AggregationMode::StitchPlusBest);
  RunReport r = run_problem(p, cfg, set.build());
  CHECK_FALSE(r.error);
  CHECK(r.answer == code);
  CHECK(r.correct);
  CHECK(r.scorer_passes == 1);
}

namespace {

// Predictor with sampling-visible randomness: the decoded text depends only
// on the per-trace seed, never on worker scheduling.
class TwoTokenPredictor : public backends::Backend {
 public:
  TwoTokenPredictor() : Backend(backends::Role::Predictor) {}

  std::vector<diffusion::Distribution> predict(const backends::Fingerprint&,
                                               const diffusion::MaskedSequence& seq,
                                               const diffusion::DecodeConfig&) override {
    std::vector<diffusion::Distribution> out;
    for (std::size_t abs : seq.masked_positions()) {
      std::size_t rel = abs - seq.prompt_len();
      diffusion::Distribution d;
      d.tokens = {"a" + std::to_string(rel) + " ", "b" + std::to_string(rel) + " "};
      d.probs = {0.6, 0.4};
      out.push_back(d);
    }
    return out;
  }
};

}  // namespace

TEST_CASE("run_problem output is invariant in the worker count") {
  using nlohmann::json;
  ts::ScenarioSet set;
  set.scorer["default"] = json{{"scores", {0.5}}};
  set.completer["default"] = json{{"chunks", {"\\boxed{7}"}}};

  auto cfg = ts::small_cfg(4, stitcher::AggregationMode::StitchPlusBest);
  cfg.gen_len = 6;
  cfg.gamma = 0.9;  // forces one sampled commit per round
  cfg.seed = 1234;

  std::vector<std::string> dumps;
  for (int workers : {1, 2, 4}) {
    cfg.workers = workers;
    backends::BackendSet bs = set.build();
    bs.predictor = std::make_shared<TwoTokenPredictor>();
    RunReport r = run_problem(ts::math_problem("w1", "q", "7"), cfg, bs);
    CHECK_FALSE(r.error);
    CHECK(r.parallel_diffusion_steps == 6);
    CHECK(r.total_diffusion_steps == 24);
    dumps.push_back(report_to_json(r).dump());
  }
  CHECK(dumps[0] == dumps[1]);
  CHECK(dumps[0] == dumps[2]);
}

TEST_CASE("run_problem turns backend failures into diagnostic reports") {
  ts::ScenarioSet set;
  set.trace_text("e1", 0, ts::math_trace({"Fine."}, "1"));
  // trace 1 has no predictor script and no default
  set.trace_scores("e1", 0, {0.9});
  set.completion("e1", {"\\boxed{1}"});

  auto cfg = ts::small_cfg(2, stitcher::AggregationMode::StitchPlusBest);
  RunReport r = run_problem(ts::math_problem("e1", "q", "1"), cfg, set.build());
  CHECK(r.error);
  CHECK(r.error_message.find("no scenario response") != std::string::npos);
  CHECK_FALSE(r.correct);
}

TEST_CASE("run_problem reports invalid configuration as an error") {
  ts::ScenarioSet set;
  auto cfg = ts::small_cfg(1, stitcher::AggregationMode::Single);
  cfg.n_traces = 0;
  RunReport r = run_problem(ts::math_problem("c1", "q", "1"), cfg, set.build());
  CHECK(r.error);
  CHECK(r.error_message.find("n_traces") != std::string::npos);
}

namespace {

class SleepyPredictor : public backends::Backend {
 public:
  explicit SleepyPredictor(int ms) : Backend(backends::Role::Predictor), ms_(ms) {}

  std::vector<diffusion::Distribution> predict(const backends::Fingerprint&,
                                               const diffusion::MaskedSequence& seq,
                                               const diffusion::DecodeConfig&) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(ms_));
    std::vector<diffusion::Distribution> out;
    for (std::size_t i = 0; i < seq.masked_positions().size(); ++i) {
      out.push_back(backends::scripted_distribution("x ", 1.0));
    }
    return out;
  }

 private:
  int ms_;
};

}  // namespace

TEST_CASE("worker pool scales wall clock roughly linearly on a fixed-latency mock") {
  using nlohmann::json;
  ts::ScenarioSet set;
  set.scorer["default"] = json{{"scores", json::array({0.5})}};
  set.completer["default"] = json{{"chunks", {"\\boxed{7}"}}};

  auto cfg = ts::small_cfg(4, stitcher::AggregationMode::StitchPlusBest);
  auto run_with = [&](int workers) {
    cfg.workers = workers;
    backends::BackendSet bs = set.build();
    bs.predictor = std::make_shared<SleepyPredictor>(80);
    RunReport r = run_problem(ts::math_problem("s1", "q", "7"), cfg, bs);
    REQUIRE_FALSE(r.error);
    return r.wall_clock_ms;
  };
  long long w1 = run_with(1);  // ~4 * 80ms
  long long w4 = run_with(4);  // ~80ms + overhead
  CHECK(w1 >= 4 * 80);
  CHECK(w4 < w1);
  // coarse linear-scaling bound: full fan-out beats half the serial time
  CHECK(w4 * 2 < w1);
}
