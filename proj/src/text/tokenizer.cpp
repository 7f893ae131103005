#include "mpcm/text/tokenizer.hpp"

#include <sstream>

#include "mpcm/text/unicode.hpp"

namespace mpcm::text {

namespace {

void emit(const std::vector<char32_t>& cps, std::size_t lo, std::size_t hi,
          std::vector<Token>& out) {
  if (lo >= hi) return;
  std::vector<char32_t> slice(cps.begin() + static_cast<std::ptrdiff_t>(lo),
                              cps.begin() + static_cast<std::ptrdiff_t>(hi));
  out.push_back({utf8_encode(slice), static_cast<int>(lo), static_cast<int>(hi)});
}

void emit_chunk(const std::vector<char32_t>& cps, std::size_t lo, std::size_t hi,
                std::vector<Token>& out) {
  while (lo < hi && is_punct_cp(cps[lo])) {
    emit(cps, lo, lo + 1, out);
    ++lo;
  }
  std::size_t tail = hi;
  while (tail > lo && is_punct_cp(cps[tail - 1])) --tail;

  // remainder [lo, tail): break at internal hyphens
  std::size_t start = lo;
  for (std::size_t k = lo; k < tail; ++k) {
    if (cps[k] == U'-') {
      emit(cps, start, k, out);
      emit(cps, k, k + 1, out);
      start = k + 1;
    }
  }
  emit(cps, start, tail, out);

  for (std::size_t k = tail; k < hi; ++k) emit(cps, k, k + 1, out);
}

// Whitespace-normalized trim used by the fuzzy alignment fallback.
std::string squeeze(const std::string& s) {
  std::istringstream in(s);
  std::string word, out;
  while (in >> word) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

}  // namespace

std::vector<Token> tokenize(const std::string& utf8_text) {
  const auto cps = utf8_decode(utf8_text);
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    if (is_space_cp(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !is_space_cp(cps[j])) ++j;
    emit_chunk(cps, i, j, out);
    i = j;
  }
  return out;
}

SpanAlignment align_answer_span(const std::vector<Token>& passage_tokens, int answer_start,
                                const std::string& answer_text) {
  const int answer_len = static_cast<int>(length_cp(answer_text));
  if (answer_len == 0 || answer_start < 0 || passage_tokens.empty()) return {};
  const int answer_end = answer_start + answer_len;

  int first = -1, last = -1;
  for (std::size_t t = 0; t < passage_tokens.size(); ++t) {
    const Token& tok = passage_tokens[t];
    if (tok.char_end > answer_start && tok.char_start < answer_end) {
      if (first < 0) first = static_cast<int>(t);
      last = static_cast<int>(t);
    }
  }
  if (first < 0) return {};

  SpanAlignment result{true, first + 1, last + 1};
  if (passage_tokens[static_cast<std::size_t>(first)].char_start == answer_start &&
      passage_tokens[static_cast<std::size_t>(last)].char_end == answer_end)
    return result;

  // A boundary cuts through a token: accept only if the covering tokens
  // reproduce the answer up to whitespace. Adjacent tokens came from one
  // whitespace chunk and concatenate exactly; separated tokens get one space.
  std::string covered;
  for (int t = first; t <= last; ++t) {
    const Token& tok = passage_tokens[static_cast<std::size_t>(t)];
    if (t > first && tok.char_start > passage_tokens[static_cast<std::size_t>(t - 1)].char_end)
      covered += ' ';
    covered += tok.text;
  }
  if (squeeze(covered) == squeeze(answer_text)) return result;
  return {};
}

}  // namespace mpcm::text
