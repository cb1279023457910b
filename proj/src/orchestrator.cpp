#include "diffstitch/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "diffstitch/solver.hpp"

namespace diffstitch::orchestrator {

void PipelineConfig::validate() const {
  if (n_traces < 1) {
    throw Error(ErrorKind::InvalidConfig, "n_traces must be >= 1");
  }
  if (workers < 1) {
    throw Error(ErrorKind::InvalidConfig, "workers must be >= 1");
  }
  if (delta < 0.0 || delta > 1.0) {
    throw Error(ErrorKind::InvalidConfig, "delta must lie in [0, 1]");
  }
  if (solver_max_tokens < 1) {
    throw Error(ErrorKind::InvalidConfig, "solver_max_tokens must be >= 1");
  }
  diffusion::DecodeConfig probe;
  probe.temperature = tau;
  probe.gamma = gamma;
  probe.max_iters = max_iters;
  probe.gen_len = gen_len;
  probe.policy = policy;
  probe.budget_per_step = budget_per_step;
  probe.validate();
}

nlohmann::json report_to_json(const RunReport& r, bool include_wall_clock) {
  nlohmann::json j = {{"problem_id", r.problem_id},
                      {"mode", r.mode},
                      {"answer", r.answer},
                      {"correct", r.correct},
                      {"error", r.error},
                      {"error_message", r.error_message},
                      {"parallel_diffusion_steps", r.parallel_diffusion_steps},
                      {"total_diffusion_steps", r.total_diffusion_steps},
                      {"scorer_passes", r.scorer_passes},
                      {"solver_steps", r.solver_steps},
                      {"solver_invocations", r.solver_invocations}};
  if (include_wall_clock) j["wall_clock_ms"] = r.wall_clock_ms;
  return j;
}

prm::StepPool gather(const std::vector<std::vector<Partial>>& partials, std::size_t n_traces) {
  std::vector<const Partial*> by_trace(n_traces, nullptr);
  for (const auto& worker : partials) {
    for (const Partial& p : worker) {
      if (p.trace >= n_traces) {
        throw Error(ErrorKind::Aggregation,
                    "partial for trace " + std::to_string(p.trace) + " out of range");
      }
      if (by_trace[p.trace] != nullptr) {
        throw Error(ErrorKind::Aggregation,
                    "duplicate partial for trace " + std::to_string(p.trace));
      }
      by_trace[p.trace] = &p;
    }
  }
  std::vector<segmenter::StepList> steps;
  std::vector<std::vector<double>> scores;
  steps.reserve(n_traces);
  scores.reserve(n_traces);
  for (std::size_t n = 0; n < n_traces; ++n) {
    if (by_trace[n] == nullptr) {
      throw Error(ErrorKind::Aggregation, "missing partial for trace " + std::to_string(n));
    }
    steps.push_back(by_trace[n]->steps);
    scores.push_back(by_trace[n]->scores);
  }
  return prm::build_step_pool(steps, scores);
}

StepAccount account_steps(const std::vector<int>& trace_steps, int solver_steps,
                          int scorer_rounds) {
  if (trace_steps.empty()) {
    throw Error(ErrorKind::InvalidInput, "no trace step counts");
  }
  StepAccount acc;
  for (int s : trace_steps) {
    acc.parallel_steps = std::max(acc.parallel_steps, s);
    acc.total_steps += s;
  }
  acc.combined = acc.parallel_steps + scorer_rounds + solver_steps;
  return acc;
}

std::string format_step_report(int parallel_diffusion_steps, int solver_steps) {
  return std::to_string(parallel_diffusion_steps) + "/" + std::to_string(solver_steps);
}

namespace {

bool mode_uses_pool(stitcher::AggregationMode m) {
  return m == stitcher::AggregationMode::BestCot ||
         m == stitcher::AggregationMode::StitchAboveConf ||
         m == stitcher::AggregationMode::StitchPlusBest;
}

std::map<std::string, std::string> proposer_fields(const Problem& p) {
  return {{"PROBLEM", p.question},
          {"problem", p.question},
          {"description", p.description},
          {"tests", p.tests},
          {"setup", p.setup}};
}

// Segments a raw generation and derives the per-trace rationale and answer
// for the task family. Extraction failures leave a zero-step trace rather
// than aborting the problem.
TraceOutcome interpret_trace(const Problem& problem, std::string raw, int steps_taken) {
  TraceOutcome out;
  out.raw_text = std::move(raw);
  out.diffusion_steps = steps_taken;
  switch (problem.family) {
    case prompts::Family::Math: {
      out.rationale = segmenter::extract_rationale(out.raw_text);
      out.steps = segmenter::segment_sentences(out.rationale);
      if (auto boxed = solver::extract_boxed(out.raw_text)) {
        out.answer = solver::normalize_answer(*boxed);
      }
      break;
    }
    case prompts::Family::CodeMbpp: {
      try {
        std::string code = segmenter::extract_code_block(out.raw_text);
        out.rationale = std::string(segmenter::trim(code));
        out.steps = segmenter::segment_lines(code);
        out.answer = out.rationale;
      } catch (const Error&) {
        out.rationale = std::string(segmenter::trim(out.raw_text));
      }
      break;
    }
    case prompts::Family::CodeHumaneval: {
      out.rationale = std::string(segmenter::trim(out.raw_text));
      out.steps = segmenter::segment_lines(segmenter::strip_hint_markers(out.rationale));
      break;
    }
  }
  return out;
}

}  // namespace

RunReport run_problem(const Problem& problem, const PipelineConfig& cfg,
                      const backends::BackendSet& backends) {
  auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.problem_id = problem.id;
  report.mode = std::string(stitcher::mode_name(cfg.mode));

  auto finish = [&](RunReport r) {
    r.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    return r;
  };
  auto fail = [&](const std::exception& e) {
    report.error = true;
    report.error_message = e.what();
    return finish(report);
  };

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    return fail(e);
  }

  prompts::ChatPrompt proposer = prompts::proposer_prompt(problem.family,
                                                          proposer_fields(problem));
  std::string prompt_text = proposer.system + "\n\n" + proposer.user;
  bool whole_gen =
      backends.predictor->predictor_mode() == backends::PredictorMode::WholeGeneration;
  bool scored = mode_uses_pool(cfg.mode);

  std::size_t n = static_cast<std::size_t>(cfg.n_traces);
  std::vector<TraceOutcome> traces(n);
  std::size_t worker_count = std::min<std::size_t>(cfg.workers, n);
  std::vector<std::vector<Partial>> partials(worker_count);
  std::atomic<std::size_t> next{0};
  std::atomic<int> scorer_calls{0};
  std::mutex error_mu;
  std::exception_ptr first_error;

  auto trace_job = [&](std::size_t trace_idx, std::vector<Partial>& sink) {
    backends::Fingerprint fp{backends::Role::Predictor, problem.id,
                             static_cast<int>(trace_idx), 0};
    diffusion::DecodeConfig dcfg;
    dcfg.temperature = cfg.tau;
    dcfg.gamma = cfg.gamma;
    dcfg.max_iters = cfg.max_iters;
    dcfg.gen_len = cfg.gen_len;
    dcfg.seed = cfg.seed ^ static_cast<std::uint64_t>(trace_idx);
    dcfg.policy = cfg.policy;
    dcfg.budget_per_step = cfg.budget_per_step;

    std::string raw;
    int steps_taken = 0;
    if (whole_gen) {
      backends::GenerateRequest greq{proposer.system, proposer.user, cfg.gen_len,
                                     cfg.max_iters,   cfg.tau,       cfg.gamma,
                                     dcfg.seed};
      backends::GenerateResponse gresp = backends.predictor->generate(fp, greq);
      raw = std::move(gresp.text);
      steps_taken = gresp.steps;
    } else {
      diffusion::MaskPredictorFn predictor(
          [&](const diffusion::MaskedSequence& seq, int iteration) {
            backends::Fingerprint step_fp = fp;
            step_fp.iteration = iteration;
            return backends.predictor->predict(step_fp, seq, dcfg);
          });
      diffusion::DecodeResult res = diffusion::decode(predictor, {prompt_text}, dcfg);
      raw = std::move(res.text);
      steps_taken = res.steps;
    }

    traces[trace_idx] = interpret_trace(problem, std::move(raw), steps_taken);

    Partial partial;
    partial.trace = trace_idx;
    partial.steps = traces[trace_idx].steps;
    if (scored && !partial.steps.empty()) {
      backends::Fingerprint sfp{backends::Role::Scorer, problem.id,
                                static_cast<int>(trace_idx), 0};
      prm::ScoreRequest sreq = prm::insert_markers(problem.question, partial.steps);
      std::vector<double> raw_scores = backends.scorer->score(sfp, sreq);
      partial.scores = prm::extract_step_scores(raw_scores, partial.steps.size());
      scorer_calls.fetch_add(1, std::memory_order_relaxed);
    } else if (!scored) {
      partial.scores.assign(partial.steps.size(), 0.0);
    }
    sink.push_back(std::move(partial));
  };

  auto worker_loop = [&](std::size_t worker_idx) {
    for (;;) {
      std::size_t trace_idx = next.fetch_add(1, std::memory_order_relaxed);
      if (trace_idx >= n) return;
      try {
        trace_job(trace_idx, partials[worker_idx]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (worker_count == 1) {
    worker_loop(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) threads.emplace_back(worker_loop, w);
    for (std::thread& t : threads) t.join();  // barrier before gather
  }
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      return fail(e);
    }
  }

  std::vector<int> step_counts;
  step_counts.reserve(n);
  for (const TraceOutcome& t : traces) step_counts.push_back(t.diffusion_steps);
  report.scorer_passes = scorer_calls.load();

  try {
    prm::StepPool pool;
    if (scored) pool = gather(partials, n);

    std::vector<stitcher::TraceView> views;
    views.reserve(n);
    for (const TraceOutcome& t : traces) {
      views.push_back(stitcher::TraceView{t.rationale, t.answer});
    }
    stitcher::Context ctx = stitcher::assemble_context(cfg.mode, views, pool, cfg.delta);

    solver::FinalAnswer final;
    if (ctx.direct) {
      final.extracted = ctx.text;
      final.parseable = !ctx.text.empty();
    } else {
      solver::SolverPrompt sp = solver::build_solver_prompt(
          problem.question, ctx.text, std::string(prompts::family_name(problem.family)));
      backends::Fingerprint cfp{backends::Role::Completer, problem.id, -1, 0};
      solver::CompleterFn completer = [&](const solver::CompleteRequest& req) {
        return backends.completer->complete(cfp, req);
      };
      final = solver::complete(completer, sp, cfg.solver_max_tokens);
      report.solver_invocations = 1;
      report.solver_steps = final.decode_steps;
    }

    if (final.parseable) {
      if (problem.family == prompts::Family::Math && !problem.exact_match) {
        report.answer = solver::normalize_answer(final.extracted);
        report.correct = solver::verify_strict(final.extracted, problem.gold_answer);
      } else {
        report.answer = ctx.direct ? final.extracted
                                   : std::string(segmenter::trim(final.extracted));
        report.correct = solver::verify_exact(report.answer, problem.gold_answer);
      }
    }

    StepAccount acc = account_steps(step_counts, report.solver_steps, scored ? 1 : 0);
    report.parallel_diffusion_steps = acc.parallel_steps;
    report.total_diffusion_steps = acc.total_steps;
  } catch (const std::exception& e) {
    return fail(e);
  }

  return finish(report);
}

}  // namespace diffstitch::orchestrator
