#include "mpcm/text/vocab.hpp"

#include "mpcm/errors.hpp"

namespace mpcm::text {

Vocabulary::Vocabulary() {
  tokens_ = {"<pad>", "<unk>"};
  index_ = {{"<pad>", kPad}, {"<unk>", kUnk}};
}

int Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  index_.emplace(token, id);
  tokens_.push_back(token);
  return id;
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return index_.find(token) != index_.end();
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw InvalidInputError("vocabulary id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

int CharVocab::add(char32_t cp) {
  auto it = index_.find(cp);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(chars_.size()) + 2;
  index_.emplace(cp, id);
  chars_.push_back(cp);
  return id;
}

int CharVocab::lookup(char32_t cp) const {
  auto it = index_.find(cp);
  return it == index_.end() ? kUnk : it->second;
}

}  // namespace mpcm::text
