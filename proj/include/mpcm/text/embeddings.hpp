#pragma once

#include <string>

#include "mpcm/tensor/tensor.hpp"
#include "mpcm/text/vocab.hpp"

namespace mpcm::text {

// Pre-trained word vectors aligned to a Vocabulary. The matrix stays frozen
// during training (requires_grad == false); rows for out-of-vocabulary
// words are drawn once, uniformly in [-0.05, 0.05], from the given seed and
// then also stay frozen.
struct EmbeddingMatrix {
  Tensor matrix;  // [vocab size x dim]
  int dim = 0;
  int oov_rows = 0;
};

// Reads `token f1 ... fdim` lines (UTF-8, space separated). Lines whose
// token part itself contains a space are skipped with a warning to stderr;
// a line with the wrong number of floats raises ParseError naming the line.
EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab, int dim,
                                std::uint64_t seed);

// Fully random matrix (same OOV distribution for every row); used when no
// pre-trained file is supplied and in tests.
EmbeddingMatrix random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed);

}  // namespace mpcm::text
