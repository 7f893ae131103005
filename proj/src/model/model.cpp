#include "mpcm/model/model.hpp"

#include <string>

#include "mpcm/rng.hpp"

namespace mpcm::model {

namespace {

int last_live(const Mask& mask) {
  for (int i = static_cast<int>(mask.size()) - 1; i >= 0; --i)
    if (mask[static_cast<std::size_t>(i)]) return i;
  throw InvalidInputError("match_passage: empty question mask");
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

Tensor word_representation(Tape& tape, const std::vector<int>& word_ids,
                           const std::vector<std::vector<int>>& char_ids,
                           const ModelParams& params, const ModelConfig& config) {
  Tensor words = gather_rows(tape, params.word_embeddings, word_ids);
  if (!config.use_char) return words;

  if (char_ids.size() != word_ids.size())
    throw DimensionError("word_representation: " + std::to_string(word_ids.size()) +
                         " tokens but " + std::to_string(char_ids.size()) + " character lists");
  std::vector<Tensor> finals;
  finals.reserve(char_ids.size());
  for (const auto& ids : char_ids) {
    if (ids.empty()) {
      finals.push_back(Tensor::zeros({config.char_hidden}));
      continue;
    }
    Tensor emb = gather_rows(tape, params.char_embeddings, ids);
    Tensor states = run_lstm(tape, emb, params.char_lstm, false);
    finals.push_back(row(tape, states, states.rows() - 1));
  }
  return concat_cols(tape, {words, stack_rows(tape, finals)});
}

Tensor relevancy(Tape& tape, const Tensor& question_reps, const Tensor& passage_reps,
                 const Mask& question_mask) {
  Tensor sims = cosine_matrix(tape, question_reps, passage_reps);  // [M x N]
  return pool_max(tape, sims, question_mask);
}

Tensor filter_passage(Tape& tape, const Tensor& passage_reps, const Tensor& r) {
  return scale_rows(tape, passage_reps, r);
}

Tensor match_passage(Tape& tape, const Tensor& q_fwd, const Tensor& q_bwd, const Tensor& p_fwd,
                     const Tensor& p_bwd, const Mask& question_mask, const ModelParams& params,
                     const ModelConfig& config) {
  std::vector<Tensor> blocks;
  if (config.use_full) {
    Tensor q_last = row(tape, q_fwd, last_live(question_mask));
    Tensor q_first = row(tape, q_bwd, 0);
    blocks.push_back(mpm_full(tape, p_fwd, q_last, params.w_full_fwd));
    blocks.push_back(mpm_full(tape, p_bwd, q_first, params.w_full_bwd));
  }
  if (config.use_max) {
    blocks.push_back(mpm_pool(tape, p_fwd, q_fwd, question_mask, params.w_max_fwd, PoolKind::max));
    blocks.push_back(mpm_pool(tape, p_bwd, q_bwd, question_mask, params.w_max_bwd, PoolKind::max));
  }
  if (config.use_mean) {
    blocks.push_back(
        mpm_pool(tape, p_fwd, q_fwd, question_mask, params.w_mean_fwd, PoolKind::mean));
    blocks.push_back(
        mpm_pool(tape, p_bwd, q_bwd, question_mask, params.w_mean_bwd, PoolKind::mean));
  }
  if (blocks.empty()) throw InvalidInputError("match_passage: no matching strategy enabled");
  return blocks.size() == 1 ? blocks[0] : concat_cols(tape, blocks);
}

Tensor aggregate(Tape& tape, const Tensor& matching, const ModelParams& params,
                 const ModelConfig& config) {
  if (!config.use_aggregation)
    return add_rowbroadcast(tape, matmul(tape, matching, params.agg_affine_w),
                            params.agg_affine_b);
  auto [fwd, bwd] = bilstm_encode(tape, matching, params.aggregation);
  return concat_cols(tape, {fwd, bwd});
}

namespace {

Tensor feed_forward_scores(Tape& tape, const Tensor& aggregated, const Tensor& w1,
                           const Tensor& b1, const Tensor& w2, const Tensor& b2) {
  Tensor hidden = tanh(tape, add_rowbroadcast(tape, matmul(tape, aggregated, w1), b1));
  return add_scalar_broadcast(tape, matvec(tape, hidden, w2), b2);
}

}  // namespace

BoundaryDistributions predict_boundaries(Tape& tape, const Tensor& aggregated,
                                         const Mask& passage_mask, const ModelParams& params) {
  BoundaryDistributions out;
  out.mask = passage_mask;
  Tensor begin_scores = feed_forward_scores(tape, aggregated, params.begin_w1, params.begin_b1,
                                            params.begin_w2, params.begin_b2);
  Tensor end_scores = feed_forward_scores(tape, aggregated, params.end_w1, params.end_b1,
                                          params.end_w2, params.end_b2);
  out.p_begin = masked_softmax(tape, begin_scores, passage_mask);
  out.p_end = masked_softmax(tape, end_scores, passage_mask);
  return out;
}

BoundaryDistributions forward_example(Tape& tape, const text::IndexedExample& example,
                                      const ModelParams& params, const ModelConfig& config,
                                      const ForwardOptions& options) {
  if (example.question_len() == 0 || example.passage_len() == 0)
    throw InvalidInputError("forward: empty question or passage");

  const bool drop = options.training && config.dropout_rate > real_t{0};
  CounterRng rng(CounterRng::derive_key(options.dropout_seed, options.dropout_stream,
                                        static_cast<std::uint64_t>(example.example_index)));
  auto maybe_drop = [&](Tensor t) {
    return drop ? dropout(tape, t, config.dropout_rate, rng) : t;
  };

  const Mask qmask = full_mask(static_cast<std::size_t>(example.question_len()));
  const Mask pmask = full_mask(static_cast<std::size_t>(example.passage_len()));

  Tensor q_repr = stage("word_representation", [&] {
    return maybe_drop(
        word_representation(tape, example.question_ids, example.question_chars, params, config));
  });
  Tensor p_repr = stage("word_representation", [&] {
    return maybe_drop(
        word_representation(tape, example.passage_ids, example.passage_chars, params, config));
  });

  if (config.use_filter) {
    p_repr = stage("filter", [&] {
      return filter_passage(tape, p_repr, relevancy(tape, q_repr, p_repr, qmask));
    });
  }

  auto [q_fwd, q_bwd] = stage("context(question)", [&] {
    auto enc = bilstm_encode(tape, q_repr, params.context);
    return std::pair{maybe_drop(enc.first), maybe_drop(enc.second)};
  });
  auto [p_fwd, p_bwd] = stage("context(passage)", [&] {
    auto enc = bilstm_encode(tape, p_repr, params.context);
    return std::pair{maybe_drop(enc.first), maybe_drop(enc.second)};
  });

  Tensor matching = stage("matching", [&] {
    return maybe_drop(
        match_passage(tape, q_fwd, q_bwd, p_fwd, p_bwd, qmask, params, config));
  });

  Tensor aggregated = stage("aggregation", [&] {
    return maybe_drop(aggregate(tape, matching, params, config));
  });

  return stage("prediction", [&] { return predict_boundaries(tape, aggregated, pmask, params); });
}

std::vector<BoundaryDistributions> forward_batch(Tape& tape, const text::Batch& batch,
                                                 const ModelParams& params,
                                                 const ModelConfig& config,
                                                 const ForwardOptions& options) {
  std::vector<BoundaryDistributions> out;
  out.reserve(static_cast<std::size_t>(batch.size));
  for (int b = 0; b < batch.size; ++b)
    out.push_back(forward_example(tape, batch.example(b), params, config, options));
  return out;
}

Tensor span_loss(Tape& tape, const BoundaryDistributions& dists, int answer_begin,
                 int answer_end) {
  if (answer_begin < 1 || answer_end < answer_begin)
    throw InvalidInputError("span_loss: invalid span (" + std::to_string(answer_begin) + ", " +
                            std::to_string(answer_end) + ")");
  Tensor nb = span_nll(tape, dists.p_begin, answer_begin - 1, dists.mask);
  Tensor ne = span_nll(tape, dists.p_end, answer_end - 1, dists.mask);
  return add(tape, nb, ne);
}

}  // namespace mpcm::model
