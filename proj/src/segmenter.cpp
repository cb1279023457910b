#include "diffstitch/segmenter.hpp"

#include <cctype>

#include "diffstitch/errors.hpp"

namespace diffstitch::segmenter {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Appends src[begin,end) as a step if it is non-empty after trimming.
void push_span(StepList& out, std::string_view src, std::size_t begin, std::size_t end) {
  while (begin < end && is_space(src[begin])) ++begin;
  while (end > begin && is_space(src[end - 1])) --end;
  if (end > begin) {
    out.push_back(Step{std::string(src.substr(begin, end - begin)), begin, end});
  }
}

bool starts_with_at(std::string_view s, std::size_t i, std::string_view what) {
  return s.size() - i >= what.size() && s.compare(i, what.size(), what) == 0;
}

}  // namespace

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

StepList segment_sentences(std::string_view text) {
  StepList out;
  std::size_t start = 0;
  int boxed_depth = 0;   // brace depth inside \boxed{...}
  bool in_math = false;  // inside $...$
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (boxed_depth > 0) {
      if (c == '{') ++boxed_depth;
      else if (c == '}') --boxed_depth;
      ++i;
      continue;
    }
    if (starts_with_at(text, i, "\\boxed{")) {
      boxed_depth = 1;
      i += 7;
      continue;
    }
    if (c == '$') {
      in_math = !in_math;
      ++i;
      continue;
    }
    if (in_math) {
      ++i;
      continue;
    }
    // Blank line: newline, optional horizontal whitespace, newline.
    if (c == '\n') {
      std::size_t j = i + 1;
      while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
      if (j >= text.size() || text[j] == '\n') {
        push_span(out, text, start, i);
        start = j < text.size() ? j + 1 : text.size();
        i = start;
        continue;
      }
    }
    if (c == '.' || c == '!' || c == '?' || c == ':') {
      bool decimal = c == '.' && i > 0 && i + 1 < text.size() && is_digit(text[i - 1]) &&
                     is_digit(text[i + 1]);
      bool at_end = i + 1 >= text.size();
      bool before_space = !at_end && is_space(text[i + 1]);
      if (!decimal && (at_end || before_space)) {
        push_span(out, text, start, i + 1);
        start = i + 1;
      }
    }
    ++i;
  }
  push_span(out, text, start, text.size());
  return out;
}

namespace {

bool comment_only(std::string_view line) {
  std::string_view t = trim(line);
  return !t.empty() && (t[0] == '#' || starts_with_at(t, 0, "//"));
}

}  // namespace

StepList segment_lines(std::string_view text) {
  StepList out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::size_t end = i;
      if (end > start && text[end - 1] == '\r') --end;
      std::string_view line = text.substr(start, end - start);
      if (!trim(line).empty() && !comment_only(line)) {
        // Keep leading indentation: trim only the right edge.
        std::size_t e = end;
        while (e > start && is_space(text[e - 1])) --e;
        out.push_back(Step{std::string(text.substr(start, e - start)), start, e});
      }
      start = i + 1;
    }
  }
  return out;
}

std::string strip_hint_markers(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string_view line = text.substr(start, i - start);
      std::size_t indent = 0;
      while (indent < line.size() && (line[indent] == ' ' || line[indent] == '\t')) ++indent;
      if (indent < line.size() && line[indent] == '#') {
        std::size_t body = indent + 1;
        if (body < line.size() && line[body] == ' ') ++body;
        out += line.substr(0, indent);
        line = line.substr(body);
      }
      out += line;
      if (i < text.size()) out += '\n';
      start = i + 1;
    }
  }
  return out;
}

std::string extract_rationale(std::string_view text) {
  constexpr std::string_view open = "<reasoning>";
  constexpr std::string_view close = "</reasoning>";
  constexpr std::string_view answer = "<answer>";
  std::size_t o = text.find(open);
  if (o != std::string_view::npos) {
    std::size_t body = o + open.size();
    std::size_t c = text.find(close, body);
    if (c != std::string_view::npos) {
      return std::string(trim(text.substr(body, c - body)));
    }
    std::size_t a = text.find(answer, body);
    std::size_t stop = a != std::string_view::npos ? a : text.size();
    return std::string(trim(text.substr(body, stop - body)));
  }
  std::size_t a = text.find(answer);
  if (a != std::string_view::npos) {
    return std::string(trim(text.substr(0, a)));
  }
  return std::string(trim(text));
}

std::string extract_answer_region(std::string_view text) {
  constexpr std::string_view open = "<answer>";
  constexpr std::string_view close = "</answer>";
  std::size_t o = text.find(open);
  if (o == std::string_view::npos) return {};
  std::size_t body = o + open.size();
  std::size_t c = text.find(close, body);
  std::size_t stop = c != std::string_view::npos ? c : text.size();
  return std::string(trim(text.substr(body, stop - body)));
}

std::string extract_code_block(std::string_view text) {
  constexpr std::string_view fence = "```";
  std::size_t o = text.find(fence);
  if (o == std::string_view::npos) {
    throw Error(ErrorKind::Extraction, "no fenced code block in trace");
  }
  std::size_t body = o + fence.size();
  // Skip a language tag up to end of the fence line.
  std::size_t nl = text.find('\n', body);
  body = nl != std::string_view::npos ? nl + 1 : text.size();
  std::size_t c = text.find(fence, body);
  std::size_t stop = c != std::string_view::npos ? c : text.size();
  return std::string(text.substr(body, stop - body));
}

}  // namespace diffstitch::segmenter
