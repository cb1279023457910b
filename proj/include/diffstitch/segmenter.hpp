#pragma once

/// Step segmentation for raw reasoning traces.
///
/// A trace is cut into an ordered list of steps before scoring. Math traces
/// are cut at sentence boundaries; code traces are cut per physical line.
/// Character offsets into the source text are kept so a step can be mapped
/// back to its span.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace diffstitch::segmenter {

struct Step {
  std::string text;   // trimmed step text, never empty
  std::size_t begin;  // offset of the first kept character in the source
  std::size_t end;    // offset one past the last kept character
};

using StepList = std::vector<Step>;

/// Sentence segmentation for math-style rationales.
///
/// A sentence ends at '.', '!', '?' or ':' followed by whitespace or end of
/// text, or at a blank line. A terminator between two digits (3.50), inside
/// \boxed{...}, or inside $...$ inline math does not split. Steps are
/// trimmed; empty steps are dropped.
StepList segment_sentences(std::string_view text);

/// Line segmentation for code: one step per physical line. Blank lines and
/// comment-only lines ('#' or '//' after indentation) are dropped. Leading
/// indentation is preserved inside each step; CRLF endings are accepted.
StepList segment_lines(std::string_view text);

/// Removes a leading "# " (or bare "#") hint marker from every line. Used
/// for rationale traces whose lines are hint-block entries, so that
/// segment_lines keeps them as steps.
std::string strip_hint_markers(std::string_view text);

/// Extracts the rationale body from tagged model output: the text between
/// <reasoning> and </reasoning>, or the text before <answer> when only that
/// tag exists, or the whole text when no tags are present. Trimmed.
std::string extract_rationale(std::string_view text);

/// Extracts the answer region: text between <answer> and </answer>, or after
/// <answer> to end of text when the close tag is missing. Empty string when
/// no <answer> tag exists. Trimmed.
std::string extract_answer_region(std::string_view text);

/// Extracts the body of the first fenced code block (``` ... ```). A language
/// tag on the fence line is skipped. Throws an extraction error when there is
/// no opening fence; an unterminated block yields the text after the fence.
std::string extract_code_block(std::string_view text);

/// Whitespace trim shared by all segmentation (space, tab, CR, LF).
std::string_view trim(std::string_view s);

}  // namespace diffstitch::segmenter
