#include "mpcm/tensor/tape.hpp"

namespace mpcm {

void Tape::backward(Tensor loss) {
  if (!loss.defined() || !loss.is_scalar())
    throw InvalidInputError("backward requires a scalar loss, got shape " +
                            (loss.defined() ? shape_str(loss.shape()) : std::string("<empty>")));
  loss.grad_data()[0] += real_t{1};
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
}

}  // namespace mpcm
