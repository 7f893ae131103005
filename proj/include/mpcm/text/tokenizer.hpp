#pragma once

#include <string>
#include <vector>

namespace mpcm::text {

struct Token {
  std::string text;
  int char_start = 0;  // codepoint offset into the source, inclusive
  int char_end = 0;    // exclusive
};

// Rule-based tokenizer: split on whitespace, then peel leading and trailing
// punctuation off each chunk as single-character tokens, then break the
// remainder at internal hyphens (the hyphen becomes its own token).
// Internal punctuation other than '-' stays put, so "U.S." tokenizes as
// ["U.S", "."] and "1,000" survives intact.
//
// Deterministic, offset-exact: source[char_start:char_end] == text for every
// token, and tokens appear in document order without overlaps.
std::vector<Token> tokenize(const std::string& utf8_text);

// Result of mapping a character-indexed answer onto the token sequence.
struct SpanAlignment {
  bool ok = false;
  int begin = 0;  // 1-based token index
  int end = 0;    // 1-based, inclusive
};

// Finds the minimal token span covering [answer_start, answer_start +
// len(answer_text)) in codepoints. When an answer boundary cuts through a
// token, the span is accepted only if the covering tokens reproduce the
// answer text after trimming surrounding whitespace/punctuation; otherwise
// the answer is reported unalignable.
SpanAlignment align_answer_span(const std::vector<Token>& passage_tokens, int answer_start,
                                const std::string& answer_text);

}  // namespace mpcm::text
