#pragma once

#include <cstdint>
#include <vector>

#include "mpcm/tensor/tensor.hpp"
#include "mpcm/text/squad.hpp"
#include "mpcm/text/vocab.hpp"

namespace mpcm::text {

// An Example resolved against the vocabularies: word ids (lowercased
// lookup), per-token character ids (original case), and the gold span.
struct IndexedExample {
  int example_index = 0;  // into the source SquadData::examples
  std::vector<int> question_ids;
  std::vector<int> passage_ids;
  std::vector<std::vector<int>> question_chars;
  std::vector<std::vector<int>> passage_chars;
  int answer_begin = 0;  // 1-based, 0 = absent
  int answer_end = 0;

  int question_len() const { return static_cast<int>(question_ids.size()); }
  int passage_len() const { return static_cast<int>(passage_ids.size()); }
};

// Adds every question/passage token (lowercased) to the vocabulary and every
// original-case codepoint to the character table.
void build_vocabs(const std::vector<Example>& examples, Vocabulary& vocab, CharVocab& chars);

// max_passage_len > 0 truncates passages for training; examples whose gold
// span would fall beyond the cap are dropped (counted in the return value).
// Pass 0 to keep everything (evaluation is never truncated).
struct IndexResult {
  std::vector<IndexedExample> examples;
  int dropped_overlong = 0;
};
IndexResult index_examples(const std::vector<Example>& examples, const Vocabulary& vocab,
                           const CharVocab& chars, int max_passage_len);

// Padded batch: index matrices are row-major [size x m_max] / [size x n_max]
// with masks marking exactly the non-padding positions. Character ids stay
// ragged per example.
struct Batch {
  int size = 0;
  int m_max = 0;  // question columns
  int n_max = 0;  // passage columns
  std::vector<int> question_ids;   // size x m_max, kPad outside mask
  std::vector<int> passage_ids;    // size x n_max
  Mask question_mask;              // size x m_max
  Mask passage_mask;               // size x n_max
  std::vector<std::vector<std::vector<int>>> question_chars;  // [size][m][len]
  std::vector<std::vector<std::vector<int>>> passage_chars;
  std::vector<int> gold_begin;     // per example, 1-based, 0 = absent
  std::vector<int> gold_end;
  std::vector<int> example_indices;

  // Reconstructs the b-th member using only the padded matrices and masks.
  IndexedExample example(int b) const;
};

// Buckets by passage length to limit padding, then shuffles batch order.
// Deterministic for a fixed seed.
std::vector<Batch> make_batches(const std::vector<IndexedExample>& examples, int batch_size,
                                std::uint64_t seed);

}  // namespace mpcm::text
