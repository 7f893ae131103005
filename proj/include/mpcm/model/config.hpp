#pragma once

#include <map>
#include <string>

#include "mpcm/tensor/tensor.hpp"

namespace mpcm::model {

// Network hyperparameters. Defaults are the full-scale settings; tests and
// desk-scale runs shrink the dimensions but keep the architecture.
struct ModelConfig {
  int word_dim = 300;
  int char_emb_dim = 20;
  int char_hidden = 100;
  int lstm_hidden = 100;
  int perspectives = 50;
  int prediction_hidden = 100;
  real_t dropout_rate = static_cast<real_t>(0.2);

  // Ablation switches; disabling a matching strategy shrinks the matching
  // vector by 2*perspectives.
  bool use_char = true;
  bool use_filter = true;
  bool use_full = true;
  bool use_max = true;
  bool use_mean = true;
  bool use_aggregation = true;

  int word_repr_dim() const { return word_dim + (use_char ? char_hidden : 0); }
  int enabled_strategies() const {
    return (use_full ? 1 : 0) + (use_max ? 1 : 0) + (use_mean ? 1 : 0);
  }
  int matching_width() const { return 2 * perspectives * enabled_strategies(); }
  int aggregated_width() const { return 2 * lstm_hidden; }

  void validate() const;

  std::map<std::string, std::string> to_map() const;
  static ModelConfig from_map(const std::map<std::string, std::string>& kv);

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace mpcm::model
