#pragma once

/// Dataset ingestion, per-mode evaluation runs and Pareto reporting.
///
/// Datasets are JSON Lines: one record per line with fields id, question,
/// gold_answer, optional family ("math" default, "code-mbpp",
/// "code-humaneval"), optional description/tests/setup for code records,
/// and optional metric ("strict" default, "exact").

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffstitch/backends.hpp"
#include "diffstitch/orchestrator.hpp"

namespace diffstitch::eval {

using DatasetRecord = orchestrator::Problem;

/// Loads a JSONL dataset. Records without a family field get
/// `default_family`. Throws with the line number on parse failures and
/// names the offending id on duplicates.
std::vector<DatasetRecord> load_dataset(const std::string& path,
                                        prompts::Family default_family = prompts::Family::Math);

struct EvalSummary {
  std::string label;
  double accuracy = 0.0;
  double mean_parallel_steps = 0.0;
  double mean_total_steps = 0.0;
  double mean_solver_steps = 0.0;
  long long wall_clock_ms = 0;  // whole-run wall clock
  int error_count = 0;
  std::vector<orchestrator::RunReport> reports;  // dataset order
  nlohmann::json config_snapshot;
};

/// Runs the pipeline over every record. Per-problem backend errors are
/// recorded in the report stream (error_count reflects them) and the run
/// continues. Throws on an empty dataset.
EvalSummary run_eval(const std::vector<DatasetRecord>& dataset,
                     const orchestrator::PipelineConfig& cfg,
                     const backends::BackendSet& backends,
                     const std::string& label = "run");

/// Canonical JSONL form of the report stream, one report per line, wall
/// clock excluded. Used for replay-fidelity hashing and determinism checks.
std::string reports_to_jsonl(const EvalSummary& summary);

/// Full summary as JSON (wall clock excluded unless requested).
nlohmann::json summary_to_json(const EvalSummary& summary, bool include_wall_clock = false);

/// Writes the accuracy/steps table as CSV, rows sorted by parallel steps
/// ascending then label. Throws on an unwritable path or empty input.
void emit_pareto(const std::vector<EvalSummary>& summaries, const std::string& out_path);

/// The CSV content emit_pareto writes; exposed for tests.
std::string pareto_csv(std::vector<EvalSummary> summaries);

nlohmann::json config_to_json(const orchestrator::PipelineConfig& cfg);

}  // namespace diffstitch::eval
