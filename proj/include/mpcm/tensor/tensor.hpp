#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "mpcm/errors.hpp"

namespace mpcm {

#ifndef MPCM_REAL
#define MPCM_REAL double
#endif
using real_t = MPCM_REAL;

using Shape = std::vector<int>;
using Mask = std::vector<std::uint8_t>;  // nonzero = live position

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);
Mask full_mask(std::size_t n);

// Dense row-major tensor participating in reverse-mode differentiation.
// A Tensor is a shared handle: copies alias the same storage, which is what
// lets tape closures reach the buffers they must read and accumulate into.
// Values are immutable once an op has produced them (the optimizer mutates
// leaf parameters between tapes); gradient buffers are allocated lazily and
// only ever accumulated into.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor constant(Shape shape, real_t value, bool requires_grad = false);
  static Tensor from_vector(Shape shape, std::vector<real_t> values, bool requires_grad = false);
  static Tensor scalar_value(real_t value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int extent(int axis) const { return impl_->shape[static_cast<std::size_t>(axis)]; }
  std::size_t size() const { return impl_->values.size(); }
  bool is_scalar() const { return impl_->values.size() == 1 && impl_->shape.size() <= 1; }

  // Rank-2 helpers.
  int rows() const;
  int cols() const;

  real_t* data() { return impl_->values.data(); }
  const real_t* data() const { return impl_->values.data(); }
  const std::vector<real_t>& values() const { return impl_->values; }
  std::vector<real_t>& mutable_values() { return impl_->values; }

  real_t item() const;
  real_t at(int i) const { return impl_->values[static_cast<std::size_t>(i)]; }
  real_t at(int i, int j) const {
    return impl_->values[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()) +
                         static_cast<std::size_t>(j)];
  }

  bool requires_grad() const { return impl_->requires_grad; }
  bool has_grad() const { return !impl_->grad.empty(); }
  // Gradient accumulation is the one permitted mutation through a const
  // handle: values are frozen once an op produced them, grads are not.
  // Allocates (zero-filled) on first access; same shape as values.
  real_t* grad_data() const;
  const std::vector<real_t>& grad() const;
  void zero_grad() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
  bool all_finite() const;

 private:
  struct Impl {
    Shape shape;
    std::vector<real_t> values;
    std::vector<real_t> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;

  static Tensor make(Shape shape, std::vector<real_t> values, bool requires_grad);
};

}  // namespace mpcm
