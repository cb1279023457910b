#include "diffstitch/stitcher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "diffstitch/errors.hpp"

namespace diffstitch::stitcher {

AggregationMode parse_mode(std::string_view name) {
  if (name == "single") return AggregationMode::Single;
  if (name == "majority") return AggregationMode::MajorityVote;
  if (name == "allcot") return AggregationMode::AllCot;
  if (name == "bestcot") return AggregationMode::BestCot;
  if (name == "stitch") return AggregationMode::StitchAboveConf;
  if (name == "stitch+best") return AggregationMode::StitchPlusBest;
  throw Error(ErrorKind::InvalidConfig, "unknown aggregation mode: " + std::string(name));
}

std::string_view mode_name(AggregationMode m) {
  switch (m) {
    case AggregationMode::Single: return "single";
    case AggregationMode::MajorityVote: return "majority";
    case AggregationMode::AllCot: return "allcot";
    case AggregationMode::BestCot: return "bestcot";
    case AggregationMode::StitchAboveConf: return "stitch";
    case AggregationMode::StitchPlusBest: return "stitch+best";
  }
  return "stitch+best";
}

double geometric_mean(const std::vector<double>& scores) {
  if (scores.empty()) return 1.0;  // (prod)^{1/max(len,1)} with len = 0
  double log_sum = 0.0;
  for (double r : scores) {
    if (r < 0.0 || r > 1.0) {
      throw Error(ErrorKind::InvalidInput, "score outside [0,1]");
    }
    if (r == 0.0) return 0.0;
    log_sum += std::log(r);
  }
  return std::exp(log_sum / static_cast<double>(scores.size()));
}

std::size_t select_anchor_trace(const prm::StepPool& pool) {
  bool found = false;
  std::size_t best = 0;
  double best_gm = -1.0;
  for (std::size_t n = 0; n < pool.trace_count; ++n) {
    if (pool.trace_lengths[n] == 0) continue;
    double gm = geometric_mean(pool.trace_scores(n));
    if (!found || gm > best_gm) {
      found = true;
      best = n;
      best_gm = gm;
    }
  }
  if (!found) {
    throw Error(ErrorKind::NoEvidence, "no non-empty trace to anchor on");
  }
  return best;
}

namespace {

EvidenceList stitch_impl(const prm::StepPool& pool, double delta, std::size_t anchor,
                         bool keep_anchor) {
  if (delta < 0.0 || delta > 1.0) {
    throw Error(ErrorKind::InvalidInput, "delta outside [0,1]");
  }
  if (anchor >= pool.trace_count) {
    throw Error(ErrorKind::InvalidInput, "anchor trace index out of range");
  }
  EvidenceList out;
  out.anchor_trace = anchor;
  out.threshold = delta;
  for (const prm::ScoredStep& e : pool.entries) {
    bool keep = e.score >= delta || (keep_anchor && e.trace == anchor);
    if (keep) {
      out.items.push_back(EvidenceItem{e.position, e.score, e.text, e.trace});
    }
  }
  std::sort(out.items.begin(), out.items.end(),
            [](const EvidenceItem& a, const EvidenceItem& b) {
              return std::tuple(a.position, -a.score, a.trace) <
                     std::tuple(b.position, -b.score, b.trace);
            });
  return out;
}

}  // namespace

EvidenceList stitch(const prm::StepPool& pool, double delta, std::size_t anchor) {
  return stitch_impl(pool, delta, anchor, true);
}

EvidenceList stitch_threshold_only(const prm::StepPool& pool, double delta,
                                   std::size_t anchor) {
  return stitch_impl(pool, delta, anchor, false);
}

std::string format_confidence(double score) {
  // Half-up at 2 decimals: 0.005 renders as 0.01 even where printf would
  // round to even.
  int scaled = static_cast<int>(std::floor(score * 100.0 + 0.5));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "[c=%d.%02d]", scaled / 100, scaled % 100);
  return buf;
}

std::string render_evidence(const EvidenceList& evidence) {
  if (evidence.items.empty()) {
    throw Error(ErrorKind::NoEvidence, "evidence list is empty");
  }
  std::string out;
  for (std::size_t i = 0; i < evidence.items.size(); ++i) {
    if (i > 0) out += '\n';
    out += format_confidence(evidence.items[i].score);
    out += ' ';
    out += evidence.items[i].text;
  }
  return out;
}

std::string majority_vote(const std::vector<std::string>& final_answers) {
  if (final_answers.empty()) {
    throw Error(ErrorKind::NoEvidence, "no answers to vote over");
  }
  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < final_answers.size(); ++i) {
    std::size_t count = 0;
    for (const std::string& a : final_answers) {
      if (a == final_answers[i]) ++count;
    }
    if (count > best_count) {  // first occurrence wins ties
      best = i;
      best_count = count;
    }
  }
  return final_answers[best];
}

Context assemble_context(AggregationMode mode,
                         const std::vector<TraceView>& traces,
                         const prm::StepPool& pool,
                         double delta) {
  switch (mode) {
    case AggregationMode::Single: {
      if (traces.empty()) {
        throw Error(ErrorKind::NoEvidence, "no traces");
      }
      return Context{false, traces[0].rationale};
    }
    case AggregationMode::MajorityVote: {
      std::vector<std::string> answers;
      answers.reserve(traces.size());
      for (const TraceView& t : traces) answers.push_back(t.answer);
      return Context{true, majority_vote(answers)};
    }
    case AggregationMode::AllCot: {
      if (traces.empty()) {
        throw Error(ErrorKind::NoEvidence, "no traces");
      }
      std::string all;
      for (std::size_t i = 0; i < traces.size(); ++i) {
        if (i > 0) all += "\n\n";
        all += traces[i].rationale;
      }
      return Context{false, all};
    }
    case AggregationMode::BestCot: {
      std::size_t anchor = select_anchor_trace(pool);
      return Context{false, traces.at(anchor).rationale};
    }
    case AggregationMode::StitchAboveConf: {
      std::size_t anchor = select_anchor_trace(pool);
      return Context{false, render_evidence(stitch_threshold_only(pool, delta, anchor))};
    }
    case AggregationMode::StitchPlusBest: {
      std::size_t anchor = select_anchor_trace(pool);
      return Context{false, render_evidence(stitch(pool, delta, anchor))};
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unhandled aggregation mode");
}

}  // namespace diffstitch::stitcher
