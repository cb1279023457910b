#pragma once

/// Process-reward scoring of segmented traces.
///
/// Every trace is scored in a single scorer call: a marker token is inserted
/// after each step and the scorer returns one probability per marker, which
/// becomes that step's score. Results from all traces form the global step
/// pool consumed by the stitcher.

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "diffstitch/segmenter.hpp"

namespace diffstitch::prm {

inline constexpr std::string_view kDefaultMarker = "<extra_0>";

/// One scorer call: the marker-interleaved steps are presented as an
/// assistant turn under the scoring system prompt.
struct ScoreRequest {
  std::string system;   // scoring instruction
  std::string problem;  // user turn, the bare problem statement
  std::string body;     // s_1 + marker + s_2 + marker + ... + s_T + marker
  std::string marker;
};

/// Builds the scoring request for one trace. The body interleaves the marker
/// after every step with no other separators. Throws invalid-input when the
/// marker occurs in the problem or in any step.
ScoreRequest insert_markers(const std::string& problem,
                            const segmenter::StepList& steps,
                            const std::string& marker = std::string(kDefaultMarker));

/// Validates and clamps raw marker probabilities. Expects exactly `expected`
/// values; values within 1e-6 outside [0,1] are clamped, anything further out
/// is a protocol error, as is a count mismatch.
std::vector<double> extract_step_scores(const std::vector<double>& marker_probs,
                                        std::size_t expected);

struct ScoredStep {
  std::size_t trace;     // n
  std::size_t position;  // t
  std::string text;
  double score;  // r in [0,1]
};

struct StepPool {
  std::vector<ScoredStep> entries;  // ordered by (trace, position)
  std::size_t trace_count = 0;
  std::vector<std::size_t> trace_lengths;  // T_n per trace

  std::vector<double> trace_scores(std::size_t n) const;
};

/// Assembles the pool from per-trace steps and their scores. Entry order is
/// (n ascending, t ascending) regardless of how results arrived. Throws
/// invalid-input on per-trace length mismatch or a score outside [0,1].
StepPool build_step_pool(const std::vector<segmenter::StepList>& traces,
                         const std::vector<std::vector<double>>& scores);

/// Scorer backend: one call scores one trace, returning per-marker
/// probabilities in step order.
using ScorerFn = std::function<std::vector<double>(const ScoreRequest&)>;

/// Scores every trace with exactly one scorer call each and builds the pool.
/// Traces with zero steps are skipped (no call, no entries).
StepPool score_traces(const ScorerFn& scorer,
                      const std::string& problem,
                      const std::vector<segmenter::StepList>& traces,
                      const std::string& marker = std::string(kDefaultMarker));

}  // namespace diffstitch::prm
