// Evaluation CLI: runs the stitching pipeline over a JSONL dataset with
// mock, remote or replayed backends and reports accuracy plus step counts.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diffstitch/eval.hpp"
#include "diffstitch/record_replay.hpp"

namespace ds = diffstitch;

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-trace stitching evaluator"};

  std::string dataset_path;
  std::vector<std::string> mode_names{"stitch+best"};
  int n_traces = 4;
  double gamma = 0.7;
  double delta = 0.8;
  double tau = 1.0;
  int gen_len = 512;
  int max_iters = 512;
  int solver_max_tokens = 512;
  std::uint64_t seed = 0;
  int workers = 1;
  std::vector<std::string> backend_flags;
  std::string record_path, replay_path, out_path, pareto_path;
  std::string family = "math";
  std::string token_env = "DIFFSTITCH_API_TOKEN";

  app.add_option("--dataset", dataset_path, "JSONL dataset path")->required();
  app.add_option("--mode", mode_names,
                 "Aggregation mode(s): single|majority|allcot|bestcot|stitch|stitch+best "
                 "(repeatable; each mode produces one run)");
  app.add_option("--n-traces", n_traces, "Diffusion traces per problem");
  app.add_option("--gamma", gamma, "Sampling confidence threshold");
  app.add_option("--delta", delta, "Stitch score threshold");
  app.add_option("--tau", tau, "Proposer temperature");
  app.add_option("--gen-len", gen_len, "Generation length per trace");
  app.add_option("--max-iters", max_iters, "Max refine iterations per trace");
  app.add_option("--seed", seed, "Base RNG seed (per-trace seed = seed XOR trace index)");
  app.add_option("--workers", workers, "Trace worker threads");
  app.add_option("--backend", backend_flags,
                 "Backend binding role=kind:target, e.g. predictor=mock:scenario.json, "
                 "scorer=remote:http://host:8000, predictor=remote-gen:http://host:8000 "
                 "(whole-generation servers)");
  app.add_option("--record", record_path, "Record all backend traffic to this cassette");
  app.add_option("--replay", replay_path,
                 "Serve all roles from this cassette (no --backend needed)");
  app.add_option("--out", out_path, "Write the run summary JSON here");
  app.add_option("--pareto", pareto_path, "Write the accuracy/steps CSV here");
  app.add_option("--family", family, "Default task family: math|code-mbpp|code-humaneval");
  app.add_option("--token-env", token_env,
                 "Environment variable holding the bearer token for remote backends");
  app.add_option("--solver-max-tokens", solver_max_tokens, "Solver decode budget");

  CLI11_PARSE(app, argc, argv);

  try {
    ds::orchestrator::PipelineConfig cfg;
    cfg.n_traces = n_traces;
    cfg.gamma = gamma;
    cfg.delta = delta;
    cfg.tau = tau;
    cfg.gen_len = gen_len;
    cfg.max_iters = max_iters;
    cfg.solver_max_tokens = solver_max_tokens;
    cfg.seed = seed;
    cfg.workers = workers;
    cfg.family = ds::prompts::parse_family(family);

    auto dataset = ds::eval::load_dataset(dataset_path, cfg.family);

    ds::backends::BackendSet set;
    if (!replay_path.empty()) {
      set = ds::backends::make_replay_set(replay_path);
    } else {
      for (const std::string& flag : backend_flags) {
        ds::backends::BackendDescriptor desc = ds::backends::parse_backend_flag(flag);
        desc.token_env = token_env;
        auto backend = ds::backends::make_backend(desc);
        switch (desc.role) {
          case ds::backends::Role::Predictor: set.predictor = backend; break;
          case ds::backends::Role::Scorer: set.scorer = backend; break;
          case ds::backends::Role::Completer: set.completer = backend; break;
        }
      }
      if (!set.predictor || !set.scorer || !set.completer) {
        std::fprintf(stderr,
                     "error: need --backend bindings for predictor, scorer and completer "
                     "(or --replay)\n");
        return 1;
      }
      if (!record_path.empty()) {
        set = ds::backends::wrap_recording(set, record_path);
      }
    }

    std::vector<ds::eval::EvalSummary> summaries;
    nlohmann::json out_doc = nlohmann::json::array();
    for (const std::string& mode_name : mode_names) {
      cfg.mode = ds::stitcher::parse_mode(mode_name);
      ds::eval::EvalSummary summary = ds::eval::run_eval(dataset, cfg, set, mode_name);
      std::printf("mode=%-11s accuracy=%.4f steps(diffusion/solver)=%.1f/%.1f errors=%d\n",
                  mode_name.c_str(), summary.accuracy, summary.mean_parallel_steps,
                  summary.mean_solver_steps, summary.error_count);
      for (const auto& report : summary.reports) {
        if (report.error) {
          std::fprintf(stderr, "  problem %s: %s\n", report.problem_id.c_str(),
                       report.error_message.c_str());
        }
      }
      out_doc.push_back(ds::eval::summary_to_json(summary, true));
      summaries.push_back(std::move(summary));
    }

    if (!out_path.empty()) {
      std::FILE* f = std::fopen(out_path.c_str(), "w");
      if (f == nullptr) {
        std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
        return 1;
      }
      std::string text = out_doc.dump(2);
      std::fwrite(text.data(), 1, text.size(), f);
      std::fputc('\n', f);
      std::fclose(f);
    }
    if (!pareto_path.empty()) {
      ds::eval::emit_pareto(summaries, pareto_path);
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
