#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mpcm/tensor/tape.hpp"
#include "mpcm/tensor/tensor.hpp"

namespace mpcm {

// Central-difference verification of analytic gradients.
//
// The error measure per coordinate is |analytic - numeric| divided by
// max(1, |analytic|, |numeric|): a true relative error for O(1) gradients
// that degrades to absolute error near zero, where relative error is
// meaningless against finite-difference noise.

struct GradCheckEntry {
  std::string name;
  std::size_t coordinate;
  double analytic;
  double numeric;
  double error;
};

struct GradCheckReport {
  double max_error = 0.0;
  bool pass = false;
  double tolerance = 0.0;
  std::size_t coordinates_checked = 0;
  std::vector<GradCheckEntry> worst;  // up to 8 worst offenders, sorted desc
};

// f evaluates the scalar under test against the current values of the
// (named) check points; it must not retain tensors across calls. The
// checker perturbs every coordinate of every point by +/-step, compares
// the centered difference against the tape gradient, and reports the max
// error. Throws NumericError if any evaluation is non-finite.
GradCheckReport grad_check(const std::function<Tensor(Tape&)>& f,
                           const std::vector<std::pair<std::string, Tensor>>& points, double step,
                           double tol);

// Single-point convenience wrapper.
GradCheckReport grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f,
                           const Tensor& point, double step, double tol);

}  // namespace mpcm
