#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace mpcm::text {

// Word-level vocabulary. Index 0 is padding, index 1 the unknown token;
// lookups are case-sensitive, so callers lowercase for embedding lookup
// (vocabularies are built from lowercased corpus tokens).
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  int add(const std::string& token);            // returns existing id if present
  int lookup(const std::string& token) const;   // kUnk when absent
  bool contains(const std::string& token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> tokens_;
};

// Character table over codepoints; same special slots as Vocabulary.
class CharVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  int add(char32_t cp);
  int lookup(char32_t cp) const;
  std::size_t size() const { return chars_.size() + 2; }
  const std::vector<char32_t>& chars() const { return chars_; }

 private:
  std::unordered_map<char32_t, int> index_;
  std::vector<char32_t> chars_;
};

}  // namespace mpcm::text
