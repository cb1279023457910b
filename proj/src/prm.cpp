#include "diffstitch/prm.hpp"

#include <algorithm>

#include "diffstitch/errors.hpp"
#include "diffstitch/prompts.hpp"

namespace diffstitch::prm {

ScoreRequest insert_markers(const std::string& problem,
                            const segmenter::StepList& steps,
                            const std::string& marker) {
  if (marker.empty()) {
    throw Error(ErrorKind::InvalidInput, "marker must be non-empty");
  }
  if (problem.find(marker) != std::string::npos) {
    throw Error(ErrorKind::InvalidInput, "marker occurs in the problem text");
  }
  std::string body;
  for (const segmenter::Step& s : steps) {
    if (s.text.find(marker) != std::string::npos) {
      throw Error(ErrorKind::InvalidInput, "marker occurs in a step");
    }
    body += s.text;
    body += marker;
  }
  ScoreRequest req;
  req.system = prompts::scorer_system();
  req.problem = problem;
  req.body = std::move(body);
  req.marker = marker;
  return req;
}

std::vector<double> extract_step_scores(const std::vector<double>& marker_probs,
                                        std::size_t expected) {
  if (marker_probs.size() != expected) {
    throw Error(ErrorKind::Protocol,
                "scorer returned " + std::to_string(marker_probs.size()) +
                    " marker probabilities, expected " + std::to_string(expected));
  }
  constexpr double tol = 1e-6;
  std::vector<double> out;
  out.reserve(expected);
  for (double p : marker_probs) {
    if (p < -tol || p > 1.0 + tol) {
      throw Error(ErrorKind::Protocol,
                  "marker probability " + std::to_string(p) + " outside [0,1]");
    }
    out.push_back(std::clamp(p, 0.0, 1.0));
  }
  return out;
}

std::vector<double> StepPool::trace_scores(std::size_t n) const {
  std::vector<double> out;
  for (const ScoredStep& e : entries) {
    if (e.trace == n) out.push_back(e.score);
  }
  return out;
}

StepPool build_step_pool(const std::vector<segmenter::StepList>& traces,
                         const std::vector<std::vector<double>>& scores) {
  if (traces.size() != scores.size()) {
    throw Error(ErrorKind::InvalidInput, "trace count does not match score-list count");
  }
  StepPool pool;
  pool.trace_count = traces.size();
  pool.trace_lengths.reserve(traces.size());
  for (std::size_t n = 0; n < traces.size(); ++n) {
    if (traces[n].size() != scores[n].size()) {
      throw Error(ErrorKind::InvalidInput,
                  "trace " + std::to_string(n) + " has " + std::to_string(traces[n].size()) +
                      " steps but " + std::to_string(scores[n].size()) + " scores");
    }
    pool.trace_lengths.push_back(traces[n].size());
    for (std::size_t t = 0; t < traces[n].size(); ++t) {
      double r = scores[n][t];
      if (r < 0.0 || r > 1.0) {
        throw Error(ErrorKind::InvalidInput, "step score outside [0,1]");
      }
      pool.entries.push_back(ScoredStep{n, t, traces[n][t].text, r});
    }
  }
  return pool;
}

StepPool score_traces(const ScorerFn& scorer,
                      const std::string& problem,
                      const std::vector<segmenter::StepList>& traces,
                      const std::string& marker) {
  std::vector<std::vector<double>> scores(traces.size());
  for (std::size_t n = 0; n < traces.size(); ++n) {
    if (traces[n].empty()) continue;  // zero-step trace: no call, no entries
    ScoreRequest req = insert_markers(problem, traces[n], marker);
    std::vector<double> raw;
    try {
      raw = scorer(req);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Backend, "scorer failed: " + std::string(e.what()));
    }
    scores[n] = extract_step_scores(raw, traces[n].size());
  }
  return build_step_pool(traces, scores);
}

}  // namespace diffstitch::prm
