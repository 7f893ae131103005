#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mpcm/model/config.hpp"
#include "mpcm/tensor/tensor.hpp"

namespace mpcm::model {

// One LSTM direction. Gates are computed as [x; h_prev] * w + b with gate
// order (input, forget, cell, output); w is [(input+hidden) x 4*hidden].
struct LstmWeights {
  Tensor w;
  Tensor b;
  int input_size = 0;
  int hidden_size = 0;
};

struct BiLstmWeights {
  LstmWeights fwd;
  LstmWeights bwd;
};

// All trainable state plus the frozen word table. Perspective matrices map
// one-to-one onto the three matching strategies in both directions; only
// the matrices of enabled strategies are allocated.
struct ModelParams {
  Tensor word_embeddings;  // [vocab x word_dim], frozen
  Tensor char_embeddings;  // [chars x char_emb_dim]
  LstmWeights char_lstm;
  BiLstmWeights context;   // shared between question and passage
  Tensor w_full_fwd, w_full_bwd;  // [l x hidden]
  Tensor w_max_fwd, w_max_bwd;
  Tensor w_mean_fwd, w_mean_bwd;
  BiLstmWeights aggregation;
  Tensor agg_affine_w, agg_affine_b;  // width-adapting map when aggregation is off
  Tensor begin_w1, begin_b1, begin_w2, begin_b2;
  Tensor end_w1, end_b1, end_w2, end_b2;

  // Canonical (name, tensor) listing of every allocated array, word table
  // first. Checkpoints and the optimizer both follow this order.
  std::vector<std::pair<std::string, Tensor>> named() const;
  // Same minus frozen tensors.
  std::vector<std::pair<std::string, Tensor>> trainable() const;

  bool all_finite() const;
};

// Glorot-uniform weight matrices, zero biases with forget gates at 1,
// perspectives uniform in [-0.1, 0.1], character embeddings in [-0.05, 0.05].
ModelParams init_params(const ModelConfig& config, Tensor word_embeddings, int char_vocab_size,
                        std::uint64_t seed);

}  // namespace mpcm::model
