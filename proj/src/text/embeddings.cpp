#include "mpcm/text/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <vector>

#include "mpcm/errors.hpp"
#include "mpcm/rng.hpp"

namespace mpcm::text {

namespace {

void fill_random_row(real_t* row, int dim, Rng& rng) {
  for (int i = 0; i < dim; ++i) row[i] = static_cast<real_t>(rng.uniform(-0.05, 0.05));
}

bool parse_real(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc{} && ptr == e;
}

}  // namespace

EmbeddingMatrix random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingMatrix emb;
  emb.dim = dim;
  emb.matrix = Tensor::zeros({static_cast<int>(vocab.size()), dim});
  for (std::size_t r = 1; r < vocab.size(); ++r)  // row 0 (padding) stays zero
    fill_random_row(emb.matrix.data() + r * static_cast<std::size_t>(dim), dim, rng);
  emb.oov_rows = static_cast<int>(vocab.size()) - 2;
  return emb;
}

EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab, int dim,
                                std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("embeddings: cannot open " + path);

  EmbeddingMatrix emb;
  emb.dim = dim;
  emb.matrix = Tensor::zeros({static_cast<int>(vocab.size()), dim});
  std::vector<bool> filled(vocab.size(), false);

  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    fields.clear();
    std::size_t pos = 0;
    while (pos < line.size()) {
      std::size_t sp = line.find(' ', pos);
      if (sp == std::string::npos) sp = line.size();
      if (sp > pos) fields.emplace_back(line.substr(pos, sp - pos));
      pos = sp + 1;
    }
    if (static_cast<int>(fields.size()) < dim + 1)
      throw ParseError("embeddings: line " + std::to_string(lineno) + " has " +
                       std::to_string(static_cast<int>(fields.size()) - 1) + " values, expected " +
                       std::to_string(dim));
    // The vector is the trailing dim fields; anything before it is the token.
    const std::size_t vec_start = fields.size() - static_cast<std::size_t>(dim);
    if (vec_start > 1) {
      std::cerr << "embeddings: skipping line " << lineno << " (token contains spaces)\n";
      continue;
    }
    std::vector<double> values(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      if (!parse_real(fields[vec_start + static_cast<std::size_t>(i)], values[static_cast<std::size_t>(i)]))
        throw ParseError("embeddings: line " + std::to_string(lineno) +
                         ": not a number: " + fields[vec_start + static_cast<std::size_t>(i)]);
    }
    const int id = vocab.lookup(fields[0]);
    if (id == Vocabulary::kUnk && fields[0] != "<unk>") continue;  // not in corpus vocabulary
    if (filled[static_cast<std::size_t>(id)]) continue;            // first occurrence wins
    real_t* row = emb.matrix.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim);
    for (int i = 0; i < dim; ++i) row[i] = static_cast<real_t>(values[static_cast<std::size_t>(i)]);
    filled[static_cast<std::size_t>(id)] = true;
  }

  Rng rng(seed);
  for (std::size_t r = 2; r < vocab.size(); ++r) {  // pad row stays zero, unk counts as OOV
    if (filled[r]) continue;
    fill_random_row(emb.matrix.data() + r * static_cast<std::size_t>(dim), dim, rng);
    ++emb.oov_rows;
  }
  if (!filled[Vocabulary::kUnk]) {
    fill_random_row(emb.matrix.data() + static_cast<std::size_t>(Vocabulary::kUnk) * static_cast<std::size_t>(dim),
                    dim, rng);
  }
  return emb;
}

}  // namespace mpcm::text
