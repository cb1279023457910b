#pragma once

/// Cross-trace stitching: anchor selection by geometric-mean trace score,
/// threshold filtering of the step pool, and rendering of the chronological
/// confidence-annotated evidence list. Also hosts the baseline aggregation
/// modes used for comparison runs.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "diffstitch/prm.hpp"

namespace diffstitch::stitcher {

enum class AggregationMode {
  Single,           // trace 0's rationale, no aggregation
  MajorityVote,     // vote over final answers, solver bypassed
  AllCot,           // every rationale concatenated
  BestCot,          // anchor trace rationale only
  StitchAboveConf,  // threshold-only keep rule, no anchor contribution
  StitchPlusBest,   // threshold plus full anchor trace
};

AggregationMode parse_mode(std::string_view name);
std::string_view mode_name(AggregationMode m);

struct EvidenceItem {
  std::size_t position;  // t
  double score;          // r
  std::string text;
  std::size_t trace;  // n, third sort key
};

struct EvidenceList {
  std::vector<EvidenceItem> items;  // sorted by (t, -r, n)
  std::size_t anchor_trace = 0;     // n*
  double threshold = 0.0;           // delta used
};

/// exp(mean log r), computed in log space. Empty list yields 1 by the
/// max(len,1) convention; a zero entry yields 0. Entries outside [0,1]
/// throw invalid-input.
double geometric_mean(const std::vector<double>& scores);

/// The non-empty trace with the highest geometric mean of step scores, ties
/// to the lowest index. Throws no-evidence when every trace is empty.
std::size_t select_anchor_trace(const prm::StepPool& pool);

/// Keeps every entry with r >= delta plus every step of the anchor trace,
/// sorted by (t, -r, n).
EvidenceList stitch(const prm::StepPool& pool, double delta, std::size_t anchor);

/// Threshold-only variant: anchor contributes nothing beyond its qualifying
/// steps. anchor_trace is still recorded for reporting.
EvidenceList stitch_threshold_only(const prm::StepPool& pool, double delta,
                                   std::size_t anchor);

/// One line per item: "[c=X.XX] <text>", score rounded half-up to 2
/// decimals, joined by newlines. Throws no-evidence on an empty list.
std::string render_evidence(const EvidenceList& evidence);

/// "[c=X.XX]" prefix for one score; exposed for tests and renderers.
std::string format_confidence(double score);

/// Most frequent answer; ties break to the one produced by the lowest trace
/// index. Answers must be pre-normalized by the caller. Throws no-evidence
/// on an empty list.
std::string majority_vote(const std::vector<std::string>& final_answers);

/// Per-trace inputs to assemble_context beyond the scored pool.
struct TraceView {
  std::string rationale;  // raw rationale region of the trace
  std::string answer;     // normalized final answer, may be empty
};

/// Either text for the solver or a direct final answer (solver bypassed).
struct Context {
  bool direct = false;
  std::string text;
};

/// Builds the solver context (or the direct answer) for one aggregation
/// mode. Stitch modes consult the pool and delta; vote mode consults only
/// the per-trace answers.
Context assemble_context(AggregationMode mode,
                         const std::vector<TraceView>& traces,
                         const prm::StepPool& pool,
                         double delta);

}  // namespace diffstitch::stitcher
