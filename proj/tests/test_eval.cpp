#include <doctest/doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "diffstitch/eval.hpp"
#include "test_support.hpp"

using namespace diffstitch;
using nlohmann::json;

namespace {

std::string valid_dataset_text() {
  return R"({"id": "m0", "question": "What is 2+2?", "gold_answer": "4"})"
         "\n"
         R"({"id": "m1", "question": "Half of 5?", "gold_answer": "5/2", "metric": "strict"})"
         "\n"
         "\n"  // blank lines are skipped
         R"({"id": "c0", "question": "Write f.", "gold_answer": "def f(): pass", )"
         R"("family": "code-mbpp", "metric": "exact", "tests": "assert f() is None", )"
         R"("description": "noop", "setup": ""})"
         "\n";
}

}  // namespace

TEST_CASE("load_dataset reads records with defaults and overrides") {
  ts::TempDir dir;
  std::string path = dir.file("ds.jsonl");
  ts::write_file(path, valid_dataset_text());

  auto ds = eval::load_dataset(path);
  REQUIRE(ds.size() == 3);
  CHECK(ds[0].id == "m0");
  CHECK(ds[0].question == "What is 2+2?");
  CHECK(ds[0].gold_answer == "4");
  CHECK(ds[0].family == prompts::Family::Math);  // default family
  CHECK_FALSE(ds[0].exact_match);                // default metric
  CHECK_FALSE(ds[1].exact_match);
  CHECK(ds[2].family == prompts::Family::CodeMbpp);
  CHECK(ds[2].exact_match);
  CHECK(ds[2].tests == "assert f() is None");
  CHECK(ds[2].description == "noop");
}

TEST_CASE("load_dataset applies the caller's default family") {
  ts::TempDir dir;
  std::string path = dir.file("ds.jsonl");
  ts::write_file(path, R"({"id": "h0", "question": "q", "gold_answer": "a"})" "\n");
  auto ds = eval::load_dataset(path, prompts::Family::CodeHumaneval);
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].family == prompts::Family::CodeHumaneval);
}

TEST_CASE("load_dataset rejects malformed files with line numbers") {
  ts::TempDir dir;
  std::string path = dir.file("ds.jsonl");

  ts::write_file(path, R"({"id": "a", "question": "q", "gold_answer": "1"})"
                       "\n{broken\n");
  try {
    eval::load_dataset(path);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  ts::write_file(path, R"({"id": "a", "question": "q"})" "\n");
  try {
    eval::load_dataset(path);
    FAIL("expected missing-field error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("gold_answer") != std::string::npos);
  }

  ts::write_file(path, R"({"id": "a", "question": "", "gold_answer": "1"})" "\n");
  CHECK(ts::thrown_kind([&] { eval::load_dataset(path); }) == ErrorKind::Io);

  ts::write_file(path,
                 R"({"id": "dup", "question": "q", "gold_answer": "1"})"
                 "\n"
                 R"({"id": "dup", "question": "r", "gold_answer": "2"})"
                 "\n");
  try {
    eval::load_dataset(path);
    FAIL("expected duplicate-id error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("duplicate dataset id: dup") != std::string::npos);
  }

  ts::write_file(path, R"({"id": "a", "question": "q", "gold_answer": "1", "metric": "fuzzy"})"
                       "\n");
  try {
    eval::load_dataset(path);
    FAIL("expected metric error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("fuzzy") != std::string::npos);
  }

  CHECK(ts::thrown_kind([&] { eval::load_dataset(dir.file("absent.jsonl")); }) == ErrorKind::Io);
}

namespace {

/// Three solvable problems plus one with no scripted predictor data, so the
/// fourth report carries an error and the run still finishes.
struct EvalFixture {
  std::vector<eval::DatasetRecord> dataset;
  backends::BackendSet backends;

  EvalFixture() {
    ts::ScenarioSet set;
    for (int i = 0; i < 3; ++i) {
      std::string id = "p" + std::to_string(i);
      std::string answer = std::to_string(10 + i);
      set.trace_text(id, 0, ts::math_trace({"Work it out.", "Confirm."}, answer));
      set.trace_text(id, 1, ts::math_trace({"Recheck."}, answer));
      set.trace_scores(id, 0, {0.9, 0.8});
      set.trace_scores(id, 1, {0.7});
      set.completion(id, {"\\boxed{" + answer + "}"});
      dataset.push_back(ts::math_problem(id, "question " + std::to_string(i), answer));
    }
    dataset.push_back(ts::math_problem("p3", "unscripted", "0"));
    backends = set.build();
  }
};

}  // namespace

TEST_CASE("run_eval aggregates accuracy, means and errors across records") {
  EvalFixture fx;
  auto cfg = ts::small_cfg(2, stitcher::AggregationMode::StitchPlusBest);
  eval::EvalSummary summary = eval::run_eval(fx.dataset, cfg, fx.backends, "smoke");

  CHECK(summary.label == "smoke");
  REQUIRE(summary.reports.size() == 4);
  CHECK(summary.error_count == 1);
  CHECK(summary.reports[3].error);
  CHECK_FALSE(summary.reports[3].correct);
  CHECK(summary.accuracy == doctest::Approx(0.75));

  // Every solvable problem decodes both traces in one round and consumes the
  // single completion chunk; the failed record contributes zeros.
  CHECK(summary.mean_parallel_steps == doctest::Approx(3.0 / 4.0));
  CHECK(summary.mean_total_steps == doctest::Approx(6.0 / 4.0));
  CHECK(summary.mean_solver_steps == doctest::Approx(3.0 / 4.0));
  CHECK(summary.config_snapshot["n_traces"] == 2);

  CHECK(ts::thrown_kind([&] { eval::run_eval({}, cfg, fx.backends); }) ==
        ErrorKind::InvalidInput);
}

TEST_CASE("report streams are deterministic and exclude wall clock") {
  EvalFixture fx;
  auto cfg = ts::small_cfg(2, stitcher::AggregationMode::StitchPlusBest);
  auto s1 = eval::run_eval(fx.dataset, cfg, fx.backends);
  auto s2 = eval::run_eval(fx.dataset, cfg, fx.backends);

  std::string jsonl = eval::reports_to_jsonl(s1);
  CHECK(jsonl == eval::reports_to_jsonl(s2));
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 4);
  CHECK(jsonl.find("wall_clock") == std::string::npos);
  CHECK(jsonl.find("\"problem_id\":\"p0\"") != std::string::npos);

  json full = eval::summary_to_json(s1);
  CHECK_FALSE(full.contains("wall_clock_ms"));
  CHECK(full["reports"].size() == 4);
  CHECK(full["accuracy"] == doctest::Approx(0.75));
  json timed = eval::summary_to_json(s1, true);
  CHECK(timed.contains("wall_clock_ms"));
  CHECK(timed["reports"][0].contains("wall_clock_ms"));
}

namespace {

eval::EvalSummary synthetic_summary(const std::string& label, double accuracy,
                                    double parallel, double total, double solver) {
  eval::EvalSummary s;
  s.label = label;
  s.accuracy = accuracy;
  s.mean_parallel_steps = parallel;
  s.mean_total_steps = total;
  s.mean_solver_steps = solver;
  s.wall_clock_ms = 12;
  return s;
}

}  // namespace

TEST_CASE("pareto_csv sorts by parallel steps then label") {
  std::vector<eval::EvalSummary> rows{
      synthetic_summary("stitch", 0.875, 82.0, 315.0, 6.5),
      synthetic_summary("budget", 0.75, 40.0, 160.0, 6.0),
      synthetic_summary("allcot", 0.8125, 82.0, 315.0, 7.0),
  };
  std::string csv = eval::pareto_csv(rows);
  CHECK(csv ==
        "label,accuracy,parallel_steps,total_steps,solver_steps,wall_clock_ms\n"
        "budget,0.7500,40.00,160.00,6.00,12\n"
        "allcot,0.8125,82.00,315.00,7.00,12\n"
        "stitch,0.8750,82.00,315.00,6.50,12\n");
  CHECK(ts::thrown_kind([] { eval::pareto_csv({}); }) == ErrorKind::InvalidInput);
}

TEST_CASE("emit_pareto writes the table and reports unwritable paths") {
  ts::TempDir dir;
  std::vector<eval::EvalSummary> rows{synthetic_summary("only", 1.0, 8.0, 16.0, 2.0)};
  std::string path = dir.file("pareto.csv");
  eval::emit_pareto(rows, path);
  CHECK(ts::read_file(path) == eval::pareto_csv(rows));

  CHECK(ts::thrown_kind([&] { eval::emit_pareto(rows, dir.file("no-dir/x.csv")); }) ==
        ErrorKind::Io);
  CHECK(ts::thrown_kind([&] { eval::emit_pareto({}, path); }) == ErrorKind::InvalidInput);
}

TEST_CASE("config snapshots carry every knob") {
  orchestrator::PipelineConfig cfg;
  cfg.n_traces = 8;
  cfg.gamma = 0.9;
  cfg.tau = 0.5;
  cfg.delta = 0.6;
  cfg.max_iters = 64;
  cfg.gen_len = 256;
  cfg.solver_max_tokens = 128;
  cfg.mode = stitcher::AggregationMode::MajorityVote;
  cfg.seed = 42;
  cfg.family = prompts::Family::CodeMbpp;
  cfg.workers = 4;
  cfg.policy = diffusion::RemaskPolicy::MaskBudget;
  cfg.budget_per_step = 3;

  json j = eval::config_to_json(cfg);
  CHECK(j["n_traces"] == 8);
  CHECK(j["gamma"] == 0.9);
  CHECK(j["tau"] == 0.5);
  CHECK(j["delta"] == 0.6);
  CHECK(j["max_iters"] == 64);
  CHECK(j["gen_len"] == 256);
  CHECK(j["solver_max_tokens"] == 128);
  CHECK(j["mode"] == "majority");
  CHECK(j["seed"] == 42);
  CHECK(j["family"] == "code-mbpp");
  CHECK(j["workers"] == 4);
  CHECK(j["policy"] == "budget");
  CHECK(j["budget_per_step"] == 3);
}
