#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "mpcm/errors.hpp"
#include "mpcm/rng.hpp"
#include "mpcm/text/batch.hpp"
#include "mpcm/text/embeddings.hpp"
#include "mpcm/text/squad.hpp"
#include "mpcm/text/tokenizer.hpp"
#include "mpcm/text/unicode.hpp"

using namespace mpcm;
using namespace mpcm::text;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("/tmp/mpcm_test_" + name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

const char* kMiniSquad = R"({
  "data": [
    {
      "title": "Fixture",
      "paragraphs": [
        {
          "context": "Welsh medium education is available to all age groups through nurseries , schools , colleges",
          "qas": [
            {
              "id": "q1",
              "question": "Who is Welsh medium education available to ?",
              "answers": [{"text": "all age groups", "answer_start": 39}]
            }
          ]
        },
        {
          "context": "Western musical instruments were introduced to enrich Chinese performing arts",
          "qas": [
            {
              "id": "q2",
              "question": "What type of musical instruments did the Yuan bring to China ?",
              "answers": [{"text": "Western", "answer_start": 0}]
            },
            {
              "id": "q3",
              "question": "What lies past the end ?",
              "answers": [{"text": "nothing", "answer_start": 5000}]
            }
          ]
        }
      ]
    }
  ]
})";

}  // namespace

TEST_CASE("tokenize") {
  SUBCASE("plain words with offsets") {
    auto toks = tokenize("all age groups");
    REQUIRE(toks.size() == 3);
    CHECK(toks[0].text == "all");
    CHECK(toks[0].char_start == 0);
    CHECK(toks[0].char_end == 3);
    CHECK(toks[1].text == "age");
    CHECK(toks[1].char_start == 4);
    CHECK(toks[1].char_end == 7);
    CHECK(toks[2].text == "groups");
    CHECK(toks[2].char_start == 8);
    CHECK(toks[2].char_end == 14);
  }
  SUBCASE("pre-separated punctuation") {
    auto toks = tokenize("Philip Roth ,");
    REQUIRE(toks.size() == 3);
    CHECK(toks[0].text == "Philip");
    CHECK(toks[1].text == "Roth");
    CHECK(toks[2].text == ",");
  }
  SUBCASE("attached punctuation splits off") {
    auto toks = tokenize("\"Hello, world!\"");
    std::vector<std::string> texts;
    for (auto& t : toks) texts.push_back(t.text);
    CHECK(texts == std::vector<std::string>{"\"", "Hello", ",", "world", "!", "\""});
  }
  SUBCASE("internal hyphens split, internal dots stay") {
    auto toks = tokenize("state-of-the-art U.S. 1,000");
    std::vector<std::string> texts;
    for (auto& t : toks) texts.push_back(t.text);
    CHECK(texts == std::vector<std::string>{"state", "-", "of", "-", "the", "-", "art",
                                            "U.S", ".", "1,000"});
  }
  SUBCASE("empty input") { CHECK(tokenize("").empty()); }
  SUBCASE("round trip: every token matches its source slice") {
    const std::string samples[] = {
        "Welsh medium education is available to all age groups through nurseries , schools",
        "A \"quoted\" phrase -- and em—dash, café au lait!",
        "  leading and trailing   spaces  ",
        "(1867) was a well-known year; remarkably so.",
    };
    for (const auto& s : samples) {
      for (const auto& t : tokenize(s)) {
        CHECK(substr_cp(s, static_cast<std::size_t>(t.char_start),
                        static_cast<std::size_t>(t.char_end)) == t.text);
        CHECK(t.char_start < t.char_end);
      }
      // in order and non-overlapping
      auto toks = tokenize(s);
      for (std::size_t i = 1; i < toks.size(); ++i)
        CHECK(toks[i].char_start >= toks[i - 1].char_end);
    }
  }
}

TEST_CASE("align_answer_span") {
  const std::string passage =
      "Welsh medium education is available to all age groups through nurseries";
  auto toks = tokenize(passage);

  SUBCASE("single-token answer") {
    auto a = align_answer_span(toks, 0, "Welsh");
    REQUIRE(a.ok);
    CHECK(a.begin == 1);
    CHECK(a.end == 1);
  }
  SUBCASE("multi-token answer lands on tokens 7..9") {
    auto a = align_answer_span(toks, 39, "all age groups");
    REQUIRE(a.ok);
    CHECK(a.begin == 7);
    CHECK(a.end == 9);
    CHECK(toks[static_cast<std::size_t>(a.begin - 1)].text == "all");
    CHECK(toks[static_cast<std::size_t>(a.end - 1)].text == "groups");
  }
  SUBCASE("boundary inside a token with mismatching text is unalignable") {
    // answer_start points into the middle of "nurseries"
    auto a = align_answer_span(toks, 65, "series of things");
    CHECK_FALSE(a.ok);
  }
  SUBCASE("trailing whitespace tolerated via trimming") {
    auto a = align_answer_span(toks, 39, "all age groups ");
    REQUIRE(a.ok);
    CHECK(a.begin == 7);
    CHECK(a.end == 9);
  }
}

TEST_CASE("load_squad") {
  TempFile file("mini.json", kMiniSquad);
  auto data = load_squad(file.path);
  REQUIRE(data.examples.size() == 3);

  const Example& q1 = data.examples[0];
  CHECK(q1.id == "q1");
  CHECK(q1.question.size() == 8);
  CHECK(q1.passage.size() == 15);
  CHECK(q1.gold_texts == std::vector<std::string>{"all age groups"});
  CHECK(q1.answer_begin == 7);
  CHECK(q1.answer_end == 9);

  // Table-style fixture: answer "Western" at offset 0 -> token span (1,1)
  const Example& q2 = data.examples[1];
  CHECK(q2.answer_begin == 1);
  CHECK(q2.answer_end == 1);

  // corrupt offset: kept for evaluation, counted as unalignable
  const Example& q3 = data.examples[2];
  CHECK_FALSE(q3.has_span());
  CHECK(data.unalignable == 1);

  SUBCASE("malformed document names the path") {
    TempFile bad("bad.json", R"({"data": [{"paragraphs": [{"qas": []}]}]})");
    CHECK_THROWS_WITH_AS(load_squad(bad.path),
                         doctest::Contains("$.data[0].paragraphs[0].context"), ParseError);
  }
  SUBCASE("invalid JSON") {
    TempFile bad("notjson.json", "{nope");
    CHECK_THROWS_AS(load_squad(bad.path), ParseError);
  }
}

TEST_CASE("alignment soundness on the fixture corpus") {
  TempFile file("mini2.json", kMiniSquad);
  auto data = load_squad(file.path);
  for (const Example& ex : data.examples) {
    if (!ex.has_span()) continue;
    const Token& first = ex.passage[static_cast<std::size_t>(ex.answer_begin - 1)];
    const Token& last = ex.passage[static_cast<std::size_t>(ex.answer_end - 1)];
    std::string span = substr_cp(ex.passage_text, static_cast<std::size_t>(first.char_start),
                                 static_cast<std::size_t>(last.char_end));
    CHECK(span.find(ex.gold_texts[0]) != std::string::npos);
  }
}

TEST_CASE("load_embeddings") {
  Vocabulary vocab;
  vocab.add("the");
  vocab.add("cat");
  vocab.add("dog");

  SUBCASE("in-vocabulary rows copied, OOV rows seeded") {
    TempFile file("emb.txt", "the 0.25 -0.5 1.0\nzebra 1 2 3\n");
    auto emb = load_embeddings(file.path, vocab, 3, 99);
    const std::size_t the_row = static_cast<std::size_t>(vocab.lookup("the")) * 3;
    CHECK(emb.matrix.data()[the_row + 0] == doctest::Approx(0.25));
    CHECK(emb.matrix.data()[the_row + 1] == doctest::Approx(-0.5));
    CHECK(emb.matrix.data()[the_row + 2] == doctest::Approx(1.0));
    CHECK(emb.oov_rows == 2);  // cat, dog

    for (const char* word : {"cat", "dog"}) {
      const std::size_t row = static_cast<std::size_t>(vocab.lookup(word)) * 3;
      for (int i = 0; i < 3; ++i) {
        CHECK(emb.matrix.data()[row + static_cast<std::size_t>(i)] >= -0.05);
        CHECK(emb.matrix.data()[row + static_cast<std::size_t>(i)] <= 0.05);
      }
    }

    auto emb2 = load_embeddings(file.path, vocab, 3, 99);
    CHECK(emb.matrix.values() == emb2.matrix.values());
    auto emb3 = load_embeddings(file.path, vocab, 3, 100);
    CHECK(emb.matrix.values() != emb3.matrix.values());
  }
  SUBCASE("wrong dimension raises with line number") {
    TempFile file("emb250.txt", "the 0.25 -0.5\n");
    CHECK_THROWS_WITH_AS(load_embeddings(file.path, vocab, 3, 1), doctest::Contains("line 1"),
                         ParseError);
  }
  SUBCASE("tokens containing spaces are skipped") {
    TempFile file("embsp.txt", ". . . 1 2 3\nthe 7 8 9\n");
    auto emb = load_embeddings(file.path, vocab, 3, 1);
    const std::size_t the_row = static_cast<std::size_t>(vocab.lookup("the")) * 3;
    CHECK(emb.matrix.data()[the_row] == doctest::Approx(7));
  }
  SUBCASE("frozen by construction") {
    TempFile file("embf.txt", "the 1 2 3\n");
    auto emb = load_embeddings(file.path, vocab, 3, 1);
    CHECK_FALSE(emb.matrix.requires_grad());
  }
}

TEST_CASE("batching") {
  // Build a small corpus with varying passage lengths.
  std::vector<Example> examples;
  Rng rng(5);
  for (int e = 0; e < 5; ++e) {
    Example ex;
    ex.id = "ex" + std::to_string(e);
    std::string text;
    const int len = (e == 3) ? 7 : 3 + e % 2;
    for (int j = 0; j < len; ++j) text += "w" + std::to_string(j) + " ";
    ex.passage_text = text;
    ex.passage = tokenize(text);
    ex.question = tokenize("what is w0 ?");
    ex.answer_begin = 1;
    ex.answer_end = 1;
    ex.gold_texts = {"w0"};
    examples.push_back(ex);
  }

  Vocabulary vocab;
  CharVocab chars;
  build_vocabs(examples, vocab, chars);
  auto indexed = index_examples(examples, vocab, chars, 0);
  REQUIRE(indexed.examples.size() == 5);

  SUBCASE("batch sizes 2,2,1 and id multiset preserved") {
    auto batches = make_batches(indexed.examples, 2, 42);
    REQUIRE(batches.size() == 3);
    int total = 0;
    std::vector<int> seen;
    for (auto& b : batches) {
      total += b.size;
      for (int idx : b.example_indices) seen.push_back(idx);
    }
    CHECK(total == 5);
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<int>{0, 1, 2, 3, 4});
  }
  SUBCASE("masks mark exactly the non-padding positions") {
    auto batches = make_batches(indexed.examples, 5, 1);
    REQUIRE(batches.size() == 1);
    const Batch& b = batches[0];
    CHECK(b.n_max == 7);
    for (int k = 0; k < b.size; ++k) {
      const IndexedExample& src = indexed.examples[0];
      (void)src;
      int live = 0;
      for (int j = 0; j < b.n_max; ++j)
        live += b.passage_mask[static_cast<std::size_t>(k) * static_cast<std::size_t>(b.n_max) +
                               static_cast<std::size_t>(j)] != 0;
      // find the source example to compare
      for (const auto& ie : indexed.examples)
        if (ie.example_index == b.example_indices[static_cast<std::size_t>(k)])
          CHECK(live == ie.passage_len());
    }
  }
  SUBCASE("deterministic under a fixed seed") {
    auto b1 = make_batches(indexed.examples, 2, 7);
    auto b2 = make_batches(indexed.examples, 2, 7);
    REQUIRE(b1.size() == b2.size());
    for (std::size_t i = 0; i < b1.size(); ++i)
      CHECK(b1[i].example_indices == b2[i].example_indices);
  }
  SUBCASE("batch round trip reproduces each member") {
    auto batches = make_batches(indexed.examples, 3, 9);
    for (auto& b : batches) {
      for (int k = 0; k < b.size; ++k) {
        IndexedExample got = b.example(k);
        const IndexedExample* want = nullptr;
        for (const auto& ie : indexed.examples)
          if (ie.example_index == got.example_index) want = &ie;
        REQUIRE(want != nullptr);
        CHECK(got.question_ids == want->question_ids);
        CHECK(got.passage_ids == want->passage_ids);
        CHECK(got.passage_chars == want->passage_chars);
        CHECK(got.answer_begin == want->answer_begin);
      }
    }
  }
  SUBCASE("training truncation drops examples whose span exceeds the cap") {
    examples[3].answer_begin = 6;
    examples[3].answer_end = 7;
    auto capped = index_examples(examples, vocab, chars, 4);
    CHECK(capped.dropped_overlong == 1);
    CHECK(capped.examples.size() == 4);
    for (auto& ie : capped.examples) CHECK(ie.passage_len() <= 4);
  }
}
