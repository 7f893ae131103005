#pragma once

#include <utility>

#include "mpcm/model/params.hpp"
#include "mpcm/tensor/ops.hpp"

namespace mpcm::model {

// One step of a standard LSTM (input/forget/output gates, no peepholes):
//   z = [x; h_prev] * w + b,  split into (i, f, g, o)
//   c = sigmoid(f) o c_prev + sigmoid(i) o tanh(g)
//   h = sigmoid(o) o tanh(c)
// Throws NumericError if the new state is non-finite.
std::pair<Tensor, Tensor> lstm_cell(Tape& tape, const Tensor& x, const Tensor& h_prev,
                                    const Tensor& c_prev, const LstmWeights& weights);

// Runs the cell over seq[T x d] from a zero state, left to right (or right
// to left when backwards); row t of the result is the hidden state at t.
Tensor run_lstm(Tape& tape, const Tensor& seq, const LstmWeights& weights, bool backwards);

// Forward and backward encodings of the sequence, each [T x hidden].
std::pair<Tensor, Tensor> bilstm_encode(Tape& tape, const Tensor& seq, const BiLstmWeights& w);

}  // namespace mpcm::model
