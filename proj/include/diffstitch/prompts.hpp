#pragma once

/// Prompt templates for the three model roles, stored as versioned text
/// assets and embedded at build time. A template file holds chat sections
/// delimited by <<<system>>>, <<<user>>> and <<<assistant>>> marker lines;
/// placeholders like {PROBLEM} are substituted verbatim.

#include <map>
#include <string>
#include <string_view>

namespace diffstitch::prompts {

enum class Family { Math, CodeMbpp, CodeHumaneval };

Family parse_family(std::string_view name);      // "math" | "code-mbpp" | "code-humaneval"
std::string_view family_name(Family f);

struct ChatPrompt {
  std::string system;
  std::string user;
  std::string assistant_prefix;  // pre-filled assistant turn, may be empty
};

/// Replaces every occurrence of "{key}" for each map entry. Unknown
/// placeholders are left untouched.
std::string substitute(std::string_view tmpl,
                       const std::map<std::string, std::string>& fields);

/// Splits a raw template into its chat sections. Missing sections are empty.
ChatPrompt parse_sections(std::string_view raw);

/// Proposer prompt for one problem. Math uses {PROBLEM}; code families use
/// {problem}, {description}, {tests}, {setup} (absent fields substitute
/// empty).
ChatPrompt proposer_prompt(Family f, const std::map<std::string, std::string>& fields);

/// Solver prompt: problem plus the rendered evidence block in the assistant
/// prefix ({STITCHED ANSWER} placeholder).
ChatPrompt solver_prompt(Family f, std::string_view problem, std::string_view evidence);

/// System text of the step-scoring prompt.
std::string scorer_system();

}  // namespace diffstitch::prompts
