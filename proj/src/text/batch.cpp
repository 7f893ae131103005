#include "mpcm/text/batch.hpp"

#include <algorithm>
#include <numeric>

#include "mpcm/rng.hpp"
#include "mpcm/text/unicode.hpp"

namespace mpcm::text {

namespace {

std::string lowercase_ascii(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::vector<int> char_ids(const std::string& token, const CharVocab& chars) {
  std::vector<int> out;
  for (char32_t cp : utf8_decode(token)) out.push_back(chars.lookup(cp));
  return out;
}

}  // namespace

void build_vocabs(const std::vector<Example>& examples, Vocabulary& vocab, CharVocab& chars) {
  for (const Example& ex : examples) {
    for (const Token& t : ex.question) {
      vocab.add(lowercase_ascii(t.text));
      for (char32_t cp : utf8_decode(t.text)) chars.add(cp);
    }
    for (const Token& t : ex.passage) {
      vocab.add(lowercase_ascii(t.text));
      for (char32_t cp : utf8_decode(t.text)) chars.add(cp);
    }
  }
}

IndexResult index_examples(const std::vector<Example>& examples, const Vocabulary& vocab,
                           const CharVocab& chars, int max_passage_len) {
  IndexResult out;
  for (std::size_t e = 0; e < examples.size(); ++e) {
    const Example& ex = examples[e];
    if (ex.question.empty() || ex.passage.empty()) continue;

    int keep = static_cast<int>(ex.passage.size());
    int begin = ex.answer_begin, end = ex.answer_end;
    if (max_passage_len > 0 && keep > max_passage_len) {
      keep = max_passage_len;
      if (ex.has_span() && ex.answer_end > keep) {
        ++out.dropped_overlong;
        continue;
      }
    }

    IndexedExample ie;
    ie.example_index = static_cast<int>(e);
    ie.answer_begin = begin;
    ie.answer_end = end;
    for (const Token& t : ex.question) {
      ie.question_ids.push_back(vocab.lookup(lowercase_ascii(t.text)));
      ie.question_chars.push_back(char_ids(t.text, chars));
    }
    for (int j = 0; j < keep; ++j) {
      const Token& t = ex.passage[static_cast<std::size_t>(j)];
      ie.passage_ids.push_back(vocab.lookup(lowercase_ascii(t.text)));
      ie.passage_chars.push_back(char_ids(t.text, chars));
    }
    out.examples.push_back(std::move(ie));
  }
  return out;
}

IndexedExample Batch::example(int b) const {
  IndexedExample ie;
  ie.example_index = example_indices[static_cast<std::size_t>(b)];
  ie.answer_begin = gold_begin[static_cast<std::size_t>(b)];
  ie.answer_end = gold_end[static_cast<std::size_t>(b)];
  const std::size_t qoff = static_cast<std::size_t>(b) * static_cast<std::size_t>(m_max);
  const std::size_t poff = static_cast<std::size_t>(b) * static_cast<std::size_t>(n_max);
  for (int i = 0; i < m_max; ++i) {
    if (!question_mask[qoff + static_cast<std::size_t>(i)]) break;
    ie.question_ids.push_back(question_ids[qoff + static_cast<std::size_t>(i)]);
    ie.question_chars.push_back(question_chars[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j < n_max; ++j) {
    if (!passage_mask[poff + static_cast<std::size_t>(j)]) break;
    ie.passage_ids.push_back(passage_ids[poff + static_cast<std::size_t>(j)]);
    ie.passage_chars.push_back(passage_chars[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]);
  }
  return ie;
}

std::vector<Batch> make_batches(const std::vector<IndexedExample>& examples, int batch_size,
                                std::uint64_t seed) {
  if (batch_size < 1) throw InvalidInputError("make_batches: batch_size must be >= 1");
  Rng rng(seed);

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  // Stable sort by passage length keeps the shuffled order within a length
  // class, so batches are length-homogeneous but composition still varies
  // by seed.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return examples[a].passage_len() < examples[b].passage_len();
  });

  std::vector<Batch> batches;
  for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(batch_size)) {
    const std::size_t n = std::min(static_cast<std::size_t>(batch_size), order.size() - at);
    Batch batch;
    batch.size = static_cast<int>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const IndexedExample& ie = examples[order[at + k]];
      batch.m_max = std::max(batch.m_max, ie.question_len());
      batch.n_max = std::max(batch.n_max, ie.passage_len());
    }
    batch.question_ids.assign(n * static_cast<std::size_t>(batch.m_max), Vocabulary::kPad);
    batch.passage_ids.assign(n * static_cast<std::size_t>(batch.n_max), Vocabulary::kPad);
    batch.question_mask.assign(n * static_cast<std::size_t>(batch.m_max), 0);
    batch.passage_mask.assign(n * static_cast<std::size_t>(batch.n_max), 0);
    for (std::size_t k = 0; k < n; ++k) {
      const IndexedExample& ie = examples[order[at + k]];
      batch.example_indices.push_back(ie.example_index);
      batch.gold_begin.push_back(ie.answer_begin);
      batch.gold_end.push_back(ie.answer_end);
      batch.question_chars.push_back(ie.question_chars);
      batch.passage_chars.push_back(ie.passage_chars);
      const std::size_t qoff = k * static_cast<std::size_t>(batch.m_max);
      const std::size_t poff = k * static_cast<std::size_t>(batch.n_max);
      for (int i = 0; i < ie.question_len(); ++i) {
        batch.question_ids[qoff + static_cast<std::size_t>(i)] = ie.question_ids[static_cast<std::size_t>(i)];
        batch.question_mask[qoff + static_cast<std::size_t>(i)] = 1;
      }
      for (int j = 0; j < ie.passage_len(); ++j) {
        batch.passage_ids[poff + static_cast<std::size_t>(j)] = ie.passage_ids[static_cast<std::size_t>(j)];
        batch.passage_mask[poff + static_cast<std::size_t>(j)] = 1;
      }
    }
    batches.push_back(std::move(batch));
  }
  rng.shuffle(batches);
  return batches;
}

}  // namespace mpcm::text
