#pragma once

/// Evidence-conditioned answer recomputation: builds the solver prompt from
/// the rendered evidence, runs one greedy completion with a client-side stop
/// rule, and extracts and verifies the final answer.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "diffstitch/prompts.hpp"

namespace diffstitch::solver {

struct SolverPrompt {
  std::string system;
  std::string user;              // contains the problem verbatim
  std::string assistant_prefix;  // evidence preamble + rendered evidence
  std::string template_id;       // "math" | "code-mbpp" | "code-humaneval"
};

/// Instantiates the solver template for the family. Throws invalid-config on
/// an unknown template id and invalid-input on empty evidence.
SolverPrompt build_solver_prompt(const std::string& problem,
                                 const std::string& evidence_text,
                                 const std::string& template_id);

/// One completion request. temperature is always 0 (greedy); stopping is
/// client-side, so no stop strings are sent.
struct CompleteRequest {
  std::string system;
  std::string user;
  std::string assistant_prefix;
  int max_tokens = 512;
  double temperature = 0.0;
};

/// Completion as a chunk stream. Mocks script per-token chunks so the stop
/// rule can fire mid-stream; a backend that only returns whole text uses one
/// chunk and reports token_count itself.
struct CompleteResponse {
  std::vector<std::string> chunks;
  int token_count = 0;  // meaningful when chunks does not carry per-token data
};

using CompleterFn = std::function<CompleteResponse(const CompleteRequest&)>;

struct FinalAnswer {
  std::string raw;        // accumulated completion text
  std::string extracted;  // empty when unparseable
  bool parseable = false;
  bool verified = false;  // set by the caller once gold is known
  int decode_steps = 0;
};

/// Runs one greedy completion. Math prompts stop at the first complete
/// balanced \boxed{...}; code prompts stop at a closed code fence. Hitting
/// max_tokens without a complete answer yields parseable=false, not an
/// error.
FinalAnswer complete(const CompleterFn& backend, const SolverPrompt& prompt,
                     int max_tokens = 512);

/// Content of the first \boxed{...} span, using a brace-depth counter where
/// a brace preceded by an odd run of backslashes does not count. nullopt
/// when there is no boxed span or braces never balance.
std::optional<std::string> extract_boxed(std::string_view text);

/// True once text contains a complete balanced \boxed{...} span.
bool has_complete_boxed(std::string_view text);

/// True once text contains a closed fenced code block.
bool has_closed_fence(std::string_view text);

/// Canonical answer form: trim, strip outer $, drop \left and \right,
/// collapse whitespace runs, lowercase purely alphabetic answers.
std::string normalize_answer(std::string_view answer);

/// Equality after normalization, or rational-number equality within 1e-9
/// (handles integers, decimals, a/b and \frac{a}{b}).
bool verify_strict(std::string_view pred, std::string_view gold);

/// Byte equality after whitespace trimming.
bool verify_exact(std::string_view pred, std::string_view gold);

/// Parses an integer, decimal, a/b or \frac{a}{b} form. nullopt otherwise.
std::optional<double> parse_rational(std::string_view s);

}  // namespace diffstitch::solver
