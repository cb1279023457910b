#include "diffstitch/solver.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "diffstitch/errors.hpp"
#include "diffstitch/segmenter.hpp"

namespace diffstitch::solver {

SolverPrompt build_solver_prompt(const std::string& problem,
                                 const std::string& evidence_text,
                                 const std::string& template_id) {
  if (evidence_text.empty()) {
    throw Error(ErrorKind::InvalidInput, "evidence text must be non-empty");
  }
  prompts::Family family = prompts::parse_family(template_id);
  prompts::ChatPrompt chat = prompts::solver_prompt(family, problem, evidence_text);
  return SolverPrompt{chat.system, chat.user, chat.assistant_prefix, template_id};
}

namespace {

// Counts trailing backslashes before position i; a brace at i is escaped iff
// the run length is odd.
bool escaped_at(std::string_view text, std::size_t i) {
  std::size_t runs = 0;
  while (i > runs && text[i - runs - 1] == '\\') ++runs;
  return runs % 2 == 1;
}

// Returns [begin, end) of the boxed payload, or nullopt.
std::optional<std::pair<std::size_t, std::size_t>> find_boxed(std::string_view text) {
  constexpr std::string_view open = "\\boxed{";
  std::size_t o = text.find(open);
  if (o == std::string_view::npos) return std::nullopt;
  std::size_t begin = o + open.size();
  int depth = 1;
  for (std::size_t i = begin; i < text.size(); ++i) {
    char c = text[i];
    if ((c == '{' || c == '}') && escaped_at(text, i)) continue;
    if (c == '{') ++depth;
    if (c == '}') {
      --depth;
      if (depth == 0) return std::pair{begin, i};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> extract_boxed(std::string_view text) {
  auto span = find_boxed(text);
  if (!span) return std::nullopt;
  return std::string(text.substr(span->first, span->second - span->first));
}

bool has_complete_boxed(std::string_view text) { return find_boxed(text).has_value(); }

bool has_closed_fence(std::string_view text) {
  constexpr std::string_view fence = "```";
  std::size_t o = text.find(fence);
  if (o == std::string_view::npos) return false;
  // The close fence must start after the opening fence line.
  std::size_t nl = text.find('\n', o + fence.size());
  if (nl == std::string_view::npos) return false;
  return text.find(fence, nl + 1) != std::string_view::npos;
}

FinalAnswer complete(const CompleterFn& backend, const SolverPrompt& prompt,
                     int max_tokens) {
  CompleteRequest req;
  req.system = prompt.system;
  req.user = prompt.user;
  req.assistant_prefix = prompt.assistant_prefix;
  req.max_tokens = max_tokens;
  req.temperature = 0.0;

  CompleteResponse resp;
  try {
    resp = backend(req);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Backend, "completer failed: " + std::string(e.what()));
  }

  bool math = prompt.template_id == "math";
  auto stopped = [&](std::string_view text) {
    return math ? has_complete_boxed(text) : has_closed_fence(text);
  };

  FinalAnswer ans;
  int consumed = 0;
  for (const std::string& chunk : resp.chunks) {
    if (consumed >= max_tokens) break;
    ans.raw += chunk;
    ++consumed;
    if (stopped(ans.raw)) break;
  }
  // A single whole-text chunk carries the backend's own token count.
  ans.decode_steps = resp.chunks.size() == 1 && resp.token_count > 0 ? resp.token_count
                                                                     : consumed;

  if (math) {
    if (auto boxed = extract_boxed(ans.raw)) {
      ans.extracted = *boxed;
      ans.parseable = true;
    }
  } else if (has_closed_fence(ans.raw) || ans.raw.find("```") != std::string::npos) {
    try {
      std::string code = segmenter::extract_code_block(ans.raw);
      std::string_view trimmed = segmenter::trim(code);
      if (!trimmed.empty()) {
        ans.extracted = std::string(trimmed);
        ans.parseable = true;
      }
    } catch (const Error&) {
      // no fenced block: unparseable outcome
    }
  }
  return ans;
}

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string erase_all(std::string s, std::string_view what) {
  std::size_t pos = 0;
  while ((pos = s.find(what, pos)) != std::string::npos) s.erase(pos, what.size());
  return s;
}

}  // namespace

std::string normalize_answer(std::string_view answer) {
  std::string_view v = segmenter::trim(answer);
  while (v.size() >= 2 && v.front() == '$' && v.back() == '$') {
    v = segmenter::trim(v.substr(1, v.size() - 2));
  }
  std::string s = erase_all(std::string(v), "\\left");
  s = erase_all(std::move(s), "\\right");
  std::string collapsed;
  bool in_ws = false;
  for (char c : s) {
    if (is_ws(c)) {
      in_ws = true;
      continue;
    }
    if (in_ws && !collapsed.empty()) collapsed += ' ';
    in_ws = false;
    collapsed += c;
  }
  bool textual = !collapsed.empty();
  for (char c : collapsed) {
    if (!std::isalpha(static_cast<unsigned char>(c)) && c != ' ') {
      textual = false;
      break;
    }
  }
  if (textual) {
    for (char& c : collapsed) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return collapsed;
}

namespace {

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

std::optional<double> parse_rational(std::string_view s) {
  s = segmenter::trim(s);
  if (s.empty()) return std::nullopt;

  // \frac{a}{b} and \dfrac{a}{b}
  for (std::string_view frac : {std::string_view("\\frac"), std::string_view("\\dfrac")}) {
    bool neg = false;
    std::string_view v = s;
    if (!v.empty() && (v.front() == '-' || v.front() == '+')) {
      neg = v.front() == '-';
      v.remove_prefix(1);
    }
    if (v.substr(0, frac.size()) == frac) {
      v.remove_prefix(frac.size());
      if (v.size() >= 2 && v.front() == '{') {
        std::size_t close = v.find('}');
        if (close == std::string_view::npos) return std::nullopt;
        auto num = parse_number(v.substr(1, close - 1));
        std::string_view rest = v.substr(close + 1);
        if (!num || rest.empty() || rest.front() != '{' || rest.back() != '}') {
          return std::nullopt;
        }
        auto den = parse_number(rest.substr(1, rest.size() - 2));
        if (!den || *den == 0.0) return std::nullopt;
        double out = *num / *den;
        return neg ? -out : out;
      }
      return std::nullopt;
    }
  }

  // a/b
  std::size_t slash = s.find('/');
  if (slash != std::string_view::npos && s.find('/', slash + 1) == std::string_view::npos) {
    auto num = parse_number(segmenter::trim(s.substr(0, slash)));
    auto den = parse_number(segmenter::trim(s.substr(slash + 1)));
    if (num && den && *den != 0.0) return *num / *den;
    return std::nullopt;
  }

  return parse_number(s);
}

bool verify_strict(std::string_view pred, std::string_view gold) {
  std::string np = normalize_answer(pred);
  std::string ng = normalize_answer(gold);
  if (np == ng) return true;
  auto vp = parse_rational(np);
  auto vg = parse_rational(ng);
  return vp && vg && std::fabs(*vp - *vg) <= 1e-9;
}

bool verify_exact(std::string_view pred, std::string_view gold) {
  return segmenter::trim(pred) == segmenter::trim(gold);
}

}  // namespace diffstitch::solver
