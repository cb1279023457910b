#pragma once

/// Per-problem pipeline: N seeded trace generations on a bounded worker
/// pool, per-trace segmentation and scoring, a single gather into the step
/// pool, context assembly for the chosen aggregation mode, and one solver
/// pass. Output is a pure function of (problem, config, backends); the
/// worker count only changes wall clock.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffstitch/backends.hpp"
#include "diffstitch/prompts.hpp"
#include "diffstitch/segmenter.hpp"
#include "diffstitch/stitcher.hpp"

namespace diffstitch::orchestrator {

struct PipelineConfig {
  int n_traces = 4;
  double gamma = 0.7;  // sampling confidence threshold
  double tau = 1.0;    // proposer temperature
  double delta = 0.8;  // stitch threshold (default is this artifact's choice)
  int max_iters = 512;
  int gen_len = 512;
  int solver_max_tokens = 512;
  stitcher::AggregationMode mode = stitcher::AggregationMode::StitchPlusBest;
  std::uint64_t seed = 0;
  prompts::Family family = prompts::Family::Math;
  int workers = 1;
  diffusion::RemaskPolicy policy = diffusion::RemaskPolicy::Threshold;
  int budget_per_step = 0;

  void validate() const;
};

struct Problem {
  std::string id;
  std::string question;
  std::string gold_answer;
  prompts::Family family = prompts::Family::Math;
  std::string description;  // code records
  std::string tests;
  std::string setup;
  bool exact_match = false;  // verify_exact instead of verify_strict
};

struct TraceOutcome {
  std::string raw_text;
  std::string rationale;
  std::string answer;  // normalized per-trace answer, may be empty
  segmenter::StepList steps;
  int diffusion_steps = 0;
};

struct RunReport {
  std::string problem_id;
  std::string mode;
  std::string answer;
  bool correct = false;
  bool error = false;
  std::string error_message;
  int parallel_diffusion_steps = 0;  // max over traces
  int total_diffusion_steps = 0;     // sum over traces
  int scorer_passes = 0;
  int solver_steps = 0;
  int solver_invocations = 0;
  long long wall_clock_ms = 0;
};

/// Canonical JSON form of a report. wall_clock_ms is excluded by default so
/// serialized streams compare equal across timing differences.
nlohmann::json report_to_json(const RunReport& report, bool include_wall_clock = false);

/// One trace's scored contribution, produced inside a worker.
struct Partial {
  std::size_t trace = 0;
  segmenter::StepList steps;
  std::vector<double> scores;
};

/// Reorders per-worker partials by trace index and builds the pool. Every
/// index 0..n_traces-1 must appear exactly once across all workers.
prm::StepPool gather(const std::vector<std::vector<Partial>>& partials, std::size_t n_traces);

struct StepAccount {
  int parallel_steps = 0;  // max trace count
  int total_steps = 0;     // sum
  int combined = 0;        // parallel + scorer rounds + solver steps
};

/// Latency accounting: the N concurrent scorer calls count as `scorer_rounds`
/// parallel passes (one by default).
StepAccount account_steps(const std::vector<int>& trace_steps, int solver_steps,
                          int scorer_rounds = 1);

/// "80/6"-style rendering: parallel diffusion steps / solver steps.
std::string format_step_report(int parallel_diffusion_steps, int solver_steps);

/// Runs the full pipeline for one problem. Backend errors do not throw; they
/// return a report with error set so a dataset run can continue.
RunReport run_problem(const Problem& problem, const PipelineConfig& cfg,
                      const backends::BackendSet& backends);

}  // namespace diffstitch::orchestrator
