#pragma once

#include <string>
#include <vector>

#include "mpcm/text/tokenizer.hpp"

namespace mpcm::text {

// One question/passage instance. Token indices are 1-based; answer_begin ==
// 0 means no aligned span (unlabeled data or an unalignable answer, which
// stays usable for evaluation through gold_texts).
struct Example {
  std::string id;
  std::string passage_text;
  std::vector<Token> question;
  std::vector<Token> passage;
  int answer_begin = 0;
  int answer_end = 0;
  std::vector<std::string> gold_texts;

  bool has_span() const { return answer_begin > 0; }
};

struct SquadData {
  std::vector<Example> examples;
  int unalignable = 0;  // answers kept for scoring but unusable as spans
};

// Parses a SQuAD v1.1 JSON file. Malformed documents raise ParseError with
// the JSON path to the offending node. Answers are aligned in listed order;
// the first alignable one provides the span.
SquadData load_squad(const std::string& path);

}  // namespace mpcm::text
