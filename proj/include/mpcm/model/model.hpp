#pragma once

#include <cstdint>
#include <vector>

#include "mpcm/model/lstm.hpp"
#include "mpcm/model/params.hpp"
#include "mpcm/text/batch.hpp"
#include "mpcm/text/vocab.hpp"

namespace mpcm::model {

// Per-position begin/end probabilities over the passage. Masked positions
// carry exactly zero probability; live positions sum to one.
struct BoundaryDistributions {
  Tensor p_begin;
  Tensor p_end;
  Mask mask;
};

// Everything needed to run the network on raw examples.
struct Model {
  ModelConfig config;
  text::Vocabulary vocab;
  text::CharVocab char_vocab;
  ModelParams params;
};

struct ForwardOptions {
  bool training = false;
  // Dropout masks are drawn from a counter generator keyed on
  // (dropout_seed, dropout_stream, example_index): reordering examples
  // within a batch or epoch cannot change the masks an example sees.
  std::uint64_t dropout_seed = 0;
  std::uint64_t dropout_stream = 0;
};

// Layer 1: word embedding + final state of a character LSTM per token.
// Rows follow the token order; width is config.word_repr_dim().
Tensor word_representation(Tape& tape, const std::vector<int>& word_ids,
                           const std::vector<std::vector<int>>& char_ids,
                           const ModelParams& params, const ModelConfig& config);

// Layer 2: r[j] = max over live question rows of cosine(q_i, p_j).
Tensor relevancy(Tape& tape, const Tensor& question_reps, const Tensor& passage_reps,
                 const Mask& question_mask);
Tensor filter_passage(Tape& tape, const Tensor& passage_reps, const Tensor& r);

// Layer 4: per passage position, the concatenation of the enabled matching
// blocks in fixed order [full_fwd; full_bwd; max_fwd; max_bwd; mean_fwd;
// mean_bwd], each perspectives wide. Full matching compares against the
// last live forward question state and the first backward state.
Tensor match_passage(Tape& tape, const Tensor& q_fwd, const Tensor& q_bwd, const Tensor& p_fwd,
                     const Tensor& p_bwd, const Mask& question_mask, const ModelParams& params,
                     const ModelConfig& config);

// Layer 5: BiLSTM aggregation (or the affine width adapter when disabled).
Tensor aggregate(Tape& tape, const Tensor& matching, const ModelParams& params,
                 const ModelConfig& config);

// Layer 6: two feed-forward scorers + softmax across the passage.
BoundaryDistributions predict_boundaries(Tape& tape, const Tensor& aggregated,
                                         const Mask& passage_mask, const ModelParams& params);

// Full six-layer composition for one example.
BoundaryDistributions forward_example(Tape& tape, const text::IndexedExample& example,
                                      const ModelParams& params, const ModelConfig& config,
                                      const ForwardOptions& options = {});

// Batch forward: members are processed through the padded matrices + masks;
// outputs are identical to running each member alone.
std::vector<BoundaryDistributions> forward_batch(Tape& tape, const text::Batch& batch,
                                                 const ModelParams& params,
                                                 const ModelConfig& config,
                                                 const ForwardOptions& options = {});

// -log p_begin[a_b] - log p_end[a_e]; indices are 1-based.
Tensor span_loss(Tape& tape, const BoundaryDistributions& dists, int answer_begin,
                 int answer_end);

}  // namespace mpcm::model
