#include "diffstitch/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>

namespace diffstitch::eval {

using nlohmann::json;

std::vector<DatasetRecord> load_dataset(const std::string& path,
                                        prompts::Family default_family) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open dataset: " + path);
  }
  std::vector<DatasetRecord> records;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Io,
                  "dataset parse failure at line " + std::to_string(lineno) + ": " + e.what());
    }
    auto require_field = [&](const char* name) -> std::string {
      if (!rec.contains(name) || !rec[name].is_string()) {
        throw Error(ErrorKind::Io, "dataset line " + std::to_string(lineno) +
                                       " is missing field '" + name + "'");
      }
      return rec[name].get<std::string>();
    };
    DatasetRecord r;
    r.id = require_field("id");
    r.question = require_field("question");
    r.gold_answer = require_field("gold_answer");
    if (r.question.empty()) {
      throw Error(ErrorKind::Io, "dataset line " + std::to_string(lineno) + " has an empty question");
    }
    r.family = rec.contains("family") ? prompts::parse_family(rec["family"].get<std::string>())
                                      : default_family;
    r.description = rec.value("description", "");
    r.tests = rec.value("tests", "");
    r.setup = rec.value("setup", "");
    std::string metric = rec.value("metric", "strict");
    if (metric == "exact") {
      r.exact_match = true;
    } else if (metric != "strict") {
      throw Error(ErrorKind::Io, "dataset line " + std::to_string(lineno) +
                                     " has unknown metric '" + metric + "'");
    }
    if (!ids.insert(r.id).second) {
      throw Error(ErrorKind::Io, "duplicate dataset id: " + r.id);
    }
    records.push_back(std::move(r));
  }
  return records;
}

json config_to_json(const orchestrator::PipelineConfig& cfg) {
  return {{"n_traces", cfg.n_traces},
          {"gamma", cfg.gamma},
          {"tau", cfg.tau},
          {"delta", cfg.delta},
          {"max_iters", cfg.max_iters},
          {"gen_len", cfg.gen_len},
          {"solver_max_tokens", cfg.solver_max_tokens},
          {"mode", std::string(stitcher::mode_name(cfg.mode))},
          {"seed", cfg.seed},
          {"family", std::string(prompts::family_name(cfg.family))},
          {"workers", cfg.workers},
          {"policy", cfg.policy == diffusion::RemaskPolicy::Threshold ? "threshold" : "budget"},
          {"budget_per_step", cfg.budget_per_step}};
}

EvalSummary run_eval(const std::vector<DatasetRecord>& dataset,
                     const orchestrator::PipelineConfig& cfg,
                     const backends::BackendSet& backends,
                     const std::string& label) {
  if (dataset.empty()) {
    throw Error(ErrorKind::InvalidInput, "dataset is empty");
  }
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();

  EvalSummary summary;
  summary.label = label;
  summary.config_snapshot = config_to_json(cfg);

  int correct = 0;
  double parallel_sum = 0.0, total_sum = 0.0, solver_sum = 0.0;
  for (const DatasetRecord& record : dataset) {
    orchestrator::RunReport report = orchestrator::run_problem(record, cfg, backends);
    if (report.error) ++summary.error_count;
    if (report.correct) ++correct;
    parallel_sum += report.parallel_diffusion_steps;
    total_sum += report.total_diffusion_steps;
    solver_sum += report.solver_steps;
    summary.reports.push_back(std::move(report));
  }
  auto count = static_cast<double>(dataset.size());
  summary.accuracy = correct / count;
  summary.mean_parallel_steps = parallel_sum / count;
  summary.mean_total_steps = total_sum / count;
  summary.mean_solver_steps = solver_sum / count;
  summary.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
  return summary;
}

std::string reports_to_jsonl(const EvalSummary& summary) {
  std::string out;
  for (const orchestrator::RunReport& r : summary.reports) {
    out += orchestrator::report_to_json(r).dump();
    out += '\n';
  }
  return out;
}

json summary_to_json(const EvalSummary& summary, bool include_wall_clock) {
  json reports = json::array();
  for (const orchestrator::RunReport& r : summary.reports) {
    reports.push_back(orchestrator::report_to_json(r, include_wall_clock));
  }
  json j = {{"label", summary.label},
            {"accuracy", summary.accuracy},
            {"mean_parallel_steps", summary.mean_parallel_steps},
            {"mean_total_steps", summary.mean_total_steps},
            {"mean_solver_steps", summary.mean_solver_steps},
            {"error_count", summary.error_count},
            {"config", summary.config_snapshot},
            {"reports", std::move(reports)}};
  if (include_wall_clock) j["wall_clock_ms"] = summary.wall_clock_ms;
  return j;
}

std::string pareto_csv(std::vector<EvalSummary> summaries) {
  if (summaries.empty()) {
    throw Error(ErrorKind::InvalidInput, "no summaries to tabulate");
  }
  std::stable_sort(summaries.begin(), summaries.end(),
                   [](const EvalSummary& a, const EvalSummary& b) {
                     if (a.mean_parallel_steps != b.mean_parallel_steps) {
                       return a.mean_parallel_steps < b.mean_parallel_steps;
                     }
                     return a.label < b.label;
                   });
  std::string out = "label,accuracy,parallel_steps,total_steps,solver_steps,wall_clock_ms\n";
  char buf[256];
  for (const EvalSummary& s : summaries) {
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%.2f,%.2f,%.2f,%lld\n", s.label.c_str(),
                  s.accuracy, s.mean_parallel_steps, s.mean_total_steps, s.mean_solver_steps,
                  s.wall_clock_ms);
    out += buf;
  }
  return out;
}

void emit_pareto(const std::vector<EvalSummary>& summaries, const std::string& out_path) {
  std::string csv = pareto_csv(summaries);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot open output file: " + out_path);
  }
  out << csv;
  if (!out) {
    throw Error(ErrorKind::Io, "write failure on " + out_path);
  }
}

}  // namespace diffstitch::eval
