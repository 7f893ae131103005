#include "mpcm/model/params.hpp"

#include <cmath>
#include <sstream>

#include "mpcm/rng.hpp"

namespace mpcm::model {

void ModelConfig::validate() const {
  if (perspectives < 1)
    throw InvalidInputError("config: perspectives must be >= 1, got " +
                            std::to_string(perspectives));
  if (enabled_strategies() == 0)
    throw InvalidInputError("config: at least one matching strategy must be enabled");
  if (!(dropout_rate >= real_t{0} && dropout_rate < real_t{1}))
    throw InvalidInputError("config: dropout_rate must lie in [0,1)");
  for (int v : {word_dim, char_emb_dim, char_hidden, lstm_hidden, prediction_hidden})
    if (v < 1) throw InvalidInputError("config: dimensions must be positive");
}

namespace {

std::string fmt_real(real_t v) {
  std::ostringstream os;
  os.precision(17);
  os << static_cast<double>(v);
  return os.str();
}

}  // namespace

std::map<std::string, std::string> ModelConfig::to_map() const {
  return {
      {"word_dim", std::to_string(word_dim)},
      {"char_emb_dim", std::to_string(char_emb_dim)},
      {"char_hidden", std::to_string(char_hidden)},
      {"lstm_hidden", std::to_string(lstm_hidden)},
      {"perspectives", std::to_string(perspectives)},
      {"prediction_hidden", std::to_string(prediction_hidden)},
      {"dropout_rate", fmt_real(dropout_rate)},
      {"use_char", use_char ? "1" : "0"},
      {"use_filter", use_filter ? "1" : "0"},
      {"use_full", use_full ? "1" : "0"},
      {"use_max", use_max ? "1" : "0"},
      {"use_mean", use_mean ? "1" : "0"},
      {"use_aggregation", use_aggregation ? "1" : "0"},
  };
}

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string>& kv) {
  ModelConfig c;
  auto geti = [&](const char* key, int& out) {
    auto it = kv.find(key);
    if (it != kv.end()) out = std::stoi(it->second);
  };
  auto getb = [&](const char* key, bool& out) {
    auto it = kv.find(key);
    if (it != kv.end()) out = (it->second != "0" && it->second != "false");
  };
  geti("word_dim", c.word_dim);
  geti("char_emb_dim", c.char_emb_dim);
  geti("char_hidden", c.char_hidden);
  geti("lstm_hidden", c.lstm_hidden);
  geti("perspectives", c.perspectives);
  geti("prediction_hidden", c.prediction_hidden);
  if (auto it = kv.find("dropout_rate"); it != kv.end())
    c.dropout_rate = static_cast<real_t>(std::stod(it->second));
  getb("use_char", c.use_char);
  getb("use_filter", c.use_filter);
  getb("use_full", c.use_full);
  getb("use_max", c.use_max);
  getb("use_mean", c.use_mean);
  getb("use_aggregation", c.use_aggregation);
  return c;
}

namespace {

Tensor glorot(Rng& rng, int rows, int cols) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::vector<real_t> v(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (auto& x : v) x = static_cast<real_t>(rng.uniform(-limit, limit));
  return Tensor::from_vector({rows, cols}, std::move(v), true);
}

Tensor glorot_vec(Rng& rng, int n, int fan_in, int fan_out) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::vector<real_t> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = static_cast<real_t>(rng.uniform(-limit, limit));
  return Tensor::from_vector({n}, std::move(v), true);
}

Tensor uniform(Rng& rng, Shape shape, double limit) {
  std::vector<real_t> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<real_t>(rng.uniform(-limit, limit));
  return Tensor::from_vector(std::move(shape), std::move(v), true);
}

LstmWeights init_lstm(Rng& rng, int input, int hidden) {
  LstmWeights w;
  w.input_size = input;
  w.hidden_size = hidden;
  w.w = glorot(rng, input + hidden, 4 * hidden);
  w.b = Tensor::zeros({4 * hidden}, true);
  // forget-gate bias starts at 1 so early cells keep their state
  for (int i = hidden; i < 2 * hidden; ++i) w.b.data()[i] = real_t{1};
  return w;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, Tensor word_embeddings, int char_vocab_size,
                        std::uint64_t seed) {
  config.validate();
  if (word_embeddings.rank() != 2 || word_embeddings.cols() != config.word_dim)
    throw DimensionError("init_params: word embedding matrix " +
                         shape_str(word_embeddings.shape()) + " does not match word_dim " +
                         std::to_string(config.word_dim));
  Rng rng(seed);
  ModelParams p;
  p.word_embeddings = std::move(word_embeddings);

  if (config.use_char) {
    p.char_embeddings = uniform(rng, {char_vocab_size, config.char_emb_dim}, 0.05);
    p.char_lstm = init_lstm(rng, config.char_emb_dim, config.char_hidden);
  }

  const int d = config.word_repr_dim();
  const int h = config.lstm_hidden;
  p.context.fwd = init_lstm(rng, d, h);
  p.context.bwd = init_lstm(rng, d, h);

  const int l = config.perspectives;
  if (config.use_full) {
    p.w_full_fwd = uniform(rng, {l, h}, 0.1);
    p.w_full_bwd = uniform(rng, {l, h}, 0.1);
  }
  if (config.use_max) {
    p.w_max_fwd = uniform(rng, {l, h}, 0.1);
    p.w_max_bwd = uniform(rng, {l, h}, 0.1);
  }
  if (config.use_mean) {
    p.w_mean_fwd = uniform(rng, {l, h}, 0.1);
    p.w_mean_bwd = uniform(rng, {l, h}, 0.1);
  }

  const int width = config.matching_width();
  if (config.use_aggregation) {
    p.aggregation.fwd = init_lstm(rng, width, h);
    p.aggregation.bwd = init_lstm(rng, width, h);
  } else {
    p.agg_affine_w = glorot(rng, width, 2 * h);
    p.agg_affine_b = Tensor::zeros({2 * h}, true);
  }

  const int ph = config.prediction_hidden;
  p.begin_w1 = glorot(rng, 2 * h, ph);
  p.begin_b1 = Tensor::zeros({ph}, true);
  p.begin_w2 = glorot_vec(rng, ph, ph, 1);
  p.begin_b2 = Tensor::scalar_value(0, true);
  p.end_w1 = glorot(rng, 2 * h, ph);
  p.end_b1 = Tensor::zeros({ph}, true);
  p.end_w2 = glorot_vec(rng, ph, ph, 1);
  p.end_b2 = Tensor::scalar_value(0, true);
  return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  auto push = [&out](const char* name, const Tensor& t) {
    if (t.defined()) out.emplace_back(name, t);
  };
  push("word_embeddings", word_embeddings);
  push("char_embeddings", char_embeddings);
  push("char_lstm.w", char_lstm.w);
  push("char_lstm.b", char_lstm.b);
  push("context.fwd.w", context.fwd.w);
  push("context.fwd.b", context.fwd.b);
  push("context.bwd.w", context.bwd.w);
  push("context.bwd.b", context.bwd.b);
  push("w_full_fwd", w_full_fwd);
  push("w_full_bwd", w_full_bwd);
  push("w_max_fwd", w_max_fwd);
  push("w_max_bwd", w_max_bwd);
  push("w_mean_fwd", w_mean_fwd);
  push("w_mean_bwd", w_mean_bwd);
  push("aggregation.fwd.w", aggregation.fwd.w);
  push("aggregation.fwd.b", aggregation.fwd.b);
  push("aggregation.bwd.w", aggregation.bwd.w);
  push("aggregation.bwd.b", aggregation.bwd.b);
  push("agg_affine.w", agg_affine_w);
  push("agg_affine.b", agg_affine_b);
  push("begin.w1", begin_w1);
  push("begin.b1", begin_b1);
  push("begin.w2", begin_w2);
  push("begin.b2", begin_b2);
  push("end.w1", end_w1);
  push("end.b1", end_b1);
  push("end.w2", end_w2);
  push("end.b2", end_b2);
  return out;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::trainable() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (auto& [name, t] : named())
    if (t.requires_grad()) out.emplace_back(name, t);
  return out;
}

bool ModelParams::all_finite() const {
  for (const auto& [name, t] : named()) {
    (void)name;
    if (!t.all_finite()) return false;
  }
  return true;
}

}  // namespace mpcm::model
