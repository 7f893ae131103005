#include "mpcm/model/lstm.hpp"

#include <cmath>

#include "mpcm/kernels/kernels.hpp"

namespace mpcm::model {

std::pair<Tensor, Tensor> lstm_cell(Tape& tape, const Tensor& x, const Tensor& h_prev,
                                    const Tensor& c_prev, const LstmWeights& weights) {
  const int h = weights.hidden_size;
  Tensor zin = concat(tape, {x, h_prev});
  Tensor z = add(tape, vecmat(tape, zin, weights.w), weights.b);
  Tensor gate_i = sigmoid(tape, slice(tape, z, 0, h));
  Tensor gate_f = sigmoid(tape, slice(tape, z, h, h));
  Tensor gate_g = tanh(tape, slice(tape, z, 2 * h, h));
  Tensor gate_o = sigmoid(tape, slice(tape, z, 3 * h, h));
  Tensor c = add(tape, mul(tape, gate_f, c_prev), mul(tape, gate_i, gate_g));
  Tensor hidden = mul(tape, gate_o, tanh(tape, c));

  const real_t probe = kernels::active<real_t>().sum(hidden.data(), hidden.size()) +
                       kernels::active<real_t>().sum(c.data(), c.size());
  if (!std::isfinite(static_cast<double>(probe)))
    throw NumericError("lstm_cell: non-finite state");
  return {hidden, c};
}

Tensor run_lstm(Tape& tape, const Tensor& seq, const LstmWeights& weights, bool backwards) {
  if (seq.rank() != 2 || seq.cols() != weights.input_size)
    throw DimensionError("run_lstm: sequence " + shape_str(seq.shape()) +
                         " vs input size " + std::to_string(weights.input_size));
  const int steps = seq.rows();
  Tensor h = Tensor::zeros({weights.hidden_size});
  Tensor c = Tensor::zeros({weights.hidden_size});
  std::vector<Tensor> hidden(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    const int t = backwards ? steps - 1 - s : s;
    try {
      std::tie(h, c) = lstm_cell(tape, row(tape, seq, t), h, c, weights);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at step " + std::to_string(t + 1) + " of " +
                         std::to_string(steps));
    }
    hidden[static_cast<std::size_t>(t)] = h;
  }
  return stack_rows(tape, hidden);
}

std::pair<Tensor, Tensor> bilstm_encode(Tape& tape, const Tensor& seq, const BiLstmWeights& w) {
  return {run_lstm(tape, seq, w.fwd, false), run_lstm(tape, seq, w.bwd, true)};
}

}  // namespace mpcm::model
