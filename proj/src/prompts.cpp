#include "diffstitch/prompts.hpp"

#include "diffstitch/errors.hpp"

namespace diffstitch::prompts {

namespace {
#include "prompt_assets.inc"
}  // namespace

Family parse_family(std::string_view name) {
  if (name == "math") return Family::Math;
  if (name == "code-mbpp") return Family::CodeMbpp;
  if (name == "code-humaneval") return Family::CodeHumaneval;
  throw Error(ErrorKind::InvalidConfig, "unknown task family: " + std::string(name));
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Math: return "math";
    case Family::CodeMbpp: return "code-mbpp";
    case Family::CodeHumaneval: return "code-humaneval";
  }
  return "math";
}

std::string substitute(std::string_view tmpl,
                       const std::map<std::string, std::string>& fields) {
  std::string out(tmpl);
  for (const auto& [key, value] : fields) {
    std::string needle = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = out.find(needle, pos)) != std::string::npos) {
      out.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  return out;
}

namespace {

// Trims exactly one trailing newline left by the section layout.
std::string_view chomp(std::string_view s) {
  if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

ChatPrompt parse_sections(std::string_view raw) {
  ChatPrompt out;
  std::string* current = nullptr;
  std::size_t start = 0;
  auto flush_line = [&](std::string_view line) {
    if (line == "<<<system>>>") {
      current = &out.system;
    } else if (line == "<<<user>>>") {
      current = &out.user;
    } else if (line == "<<<assistant>>>") {
      current = &out.assistant_prefix;
    } else if (current != nullptr) {
      *current += line;
      *current += '\n';
    }
  };
  for (std::size_t i = 0; i <= raw.size(); ++i) {
    if (i == raw.size() || raw[i] == '\n') {
      std::string_view line = raw.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (i < raw.size() || !line.empty()) flush_line(line);
      start = i + 1;
    }
  }
  out.system = std::string(chomp(out.system));
  out.user = std::string(chomp(out.user));
  out.assistant_prefix = std::string(chomp(out.assistant_prefix));
  return out;
}

ChatPrompt proposer_prompt(Family f, const std::map<std::string, std::string>& fields) {
  std::string_view raw;
  switch (f) {
    case Family::Math: raw = kTemplate_math_proposer; break;
    case Family::CodeMbpp: raw = kTemplate_code_mbpp_proposer; break;
    case Family::CodeHumaneval: raw = kTemplate_code_humaneval_proposer; break;
  }
  std::map<std::string, std::string> all = {
      {"PROBLEM", ""}, {"problem", ""}, {"description", ""}, {"tests", ""}, {"setup", ""}};
  for (const auto& [k, v] : fields) all[k] = v;
  return parse_sections(substitute(raw, all));
}

ChatPrompt solver_prompt(Family f, std::string_view problem, std::string_view evidence) {
  std::string_view raw = f == Family::Math ? kTemplate_math_solver : kTemplate_code_solver;
  return parse_sections(substitute(
      raw, {{"PROBLEM", std::string(problem)}, {"STITCHED ANSWER", std::string(evidence)}}));
}

std::string scorer_system() {
  return parse_sections(kTemplate_math_prm).system;
}

}  // namespace diffstitch::prompts
