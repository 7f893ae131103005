#include "mpcm/tensor/tensor.hpp"

#include <cmath>
#include <sstream>

namespace mpcm {

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int e : s) n *= static_cast<std::size_t>(e);
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << "x";
    os << s[i];
  }
  os << "]";
  return os.str();
}

Mask full_mask(std::size_t n) { return Mask(n, 1); }

Tensor Tensor::make(Shape shape, std::vector<real_t> values, bool requires_grad) {
  for (int e : shape)
    if (e <= 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
  if (shape_numel(shape) != values.size())
    throw DimensionError("shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = std::move(shape);
  t.impl_->values = std::move(values);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<real_t> v(shape_numel(shape), real_t{0});
  return make(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::constant(Shape shape, real_t value, bool requires_grad) {
  std::vector<real_t> v(shape_numel(shape), value);
  return make(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::from_vector(Shape shape, std::vector<real_t> values, bool requires_grad) {
  return make(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::scalar_value(real_t value, bool requires_grad) {
  return make(Shape{}, std::vector<real_t>{value}, requires_grad);
}

int Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() on tensor of shape " + shape_str(shape()));
  return impl_->shape[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() on tensor of shape " + shape_str(shape()));
  return impl_->shape[1];
}

real_t Tensor::item() const {
  if (!is_scalar())
    throw InvalidInputError("item() requires a scalar, got shape " + shape_str(shape()));
  return impl_->values[0];
}

real_t* Tensor::grad_data() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), real_t{0});
  return impl_->grad.data();
}

const std::vector<real_t>& Tensor::grad() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), real_t{0});
  return impl_->grad;
}

void Tensor::zero_grad() const {
  if (!impl_->grad.empty()) impl_->grad.assign(impl_->grad.size(), real_t{0});
}

bool Tensor::all_finite() const {
  for (real_t v : impl_->values)
    if (!std::isfinite(static_cast<double>(v))) return false;
  return true;
}

}  // namespace mpcm
