#include "mpcm/text/squad.hpp"

#include <fstream>
#include <json.hpp>

#include "mpcm/errors.hpp"

namespace mpcm::text {

using nlohmann::json;

namespace {

const json& field(const json& node, const char* key, const std::string& path) {
  auto it = node.find(key);
  if (it == node.end() || it->is_null())
    throw ParseError("squad: missing key at " + path + "." + key);
  return *it;
}

}  // namespace

SquadData load_squad(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("squad: cannot open " + path);

  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("squad: invalid JSON in " + path + ": " + e.what());
  }

  SquadData out;
  const json& data = field(doc, "data", "$");
  if (!data.is_array()) throw ParseError("squad: $.data is not an array");

  for (std::size_t a = 0; a < data.size(); ++a) {
    const std::string apath = "$.data[" + std::to_string(a) + "]";
    const json& paragraphs = field(data[a], "paragraphs", apath);
    if (!paragraphs.is_array()) throw ParseError("squad: " + apath + ".paragraphs is not an array");

    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      const std::string ppath = apath + ".paragraphs[" + std::to_string(p) + "]";
      const json& para = paragraphs[p];
      const json& context = field(para, "context", ppath);
      if (!context.is_string()) throw ParseError("squad: " + ppath + ".context is not a string");
      const std::string passage_text = context.get<std::string>();
      const std::vector<Token> passage_tokens = tokenize(passage_text);

      const json& qas = field(para, "qas", ppath);
      if (!qas.is_array()) throw ParseError("squad: " + ppath + ".qas is not an array");

      for (std::size_t q = 0; q < qas.size(); ++q) {
        const std::string qpath = ppath + ".qas[" + std::to_string(q) + "]";
        const json& qa = qas[q];

        Example ex;
        const json& id = field(qa, "id", qpath);
        ex.id = id.is_string() ? id.get<std::string>() : id.dump();
        const json& question = field(qa, "question", qpath);
        if (!question.is_string())
          throw ParseError("squad: " + qpath + ".question is not a string");
        ex.question = tokenize(question.get<std::string>());
        ex.passage = passage_tokens;
        ex.passage_text = passage_text;

        const json& answers = field(qa, "answers", qpath);
        if (!answers.is_array())
          throw ParseError("squad: " + qpath + ".answers is not an array");
        for (std::size_t an = 0; an < answers.size(); ++an) {
          const std::string anpath = qpath + ".answers[" + std::to_string(an) + "]";
          const json& answer = answers[an];
          const json& text = field(answer, "text", anpath);
          const json& start = field(answer, "answer_start", anpath);
          if (!text.is_string() || !start.is_number_integer())
            throw ParseError("squad: malformed answer at " + anpath);
          ex.gold_texts.push_back(text.get<std::string>());
          if (!ex.has_span()) {
            SpanAlignment span =
                align_answer_span(passage_tokens, start.get<int>(), text.get<std::string>());
            if (span.ok) {
              ex.answer_begin = span.begin;
              ex.answer_end = span.end;
            }
          }
        }
        if (!ex.gold_texts.empty() && !ex.has_span()) ++out.unalignable;
        out.examples.push_back(std::move(ex));
      }
    }
  }
  return out;
}

}  // namespace mpcm::text
