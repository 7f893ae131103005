#pragma once

#include <functional>
#include <vector>

#include "mpcm/tensor/tensor.hpp"

namespace mpcm {

// Records one backward rule per differentiable operation, in execution
// order. backward() replays the rules in reverse, which yields gradients
// for every requires_grad tensor reachable from the loss; fan-out
// accumulates additively because rules only ever add into grad buffers.
//
// A tape is rebuilt per forward pass and is confined to one thread;
// independent tapes may run concurrently over shared (read-only) inputs.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  std::size_t num_records() const { return records_.size(); }

  void record(std::function<void()> backward_rule) {
    if (recording_) records_.push_back(std::move(backward_rule));
  }

  // Seeds d(loss)/d(loss) = 1 and replays all rules in reverse order.
  // Throws InvalidInputError if loss is not a scalar.
  void backward(Tensor loss);

  void clear() { records_.clear(); }

 private:
  std::vector<std::function<void()>> records_;
  bool recording_;
};

// Convenience tape for inference paths: records nothing.
inline Tape inference_tape() { return Tape(false); }

}  // namespace mpcm
