#pragma once

#include <cstddef>

namespace mpcm::kernels {

// Dense inner loops behind the tensor layer. Each entry exists as a scalar
// reference implementation plus SIMD variants; the active table is chosen
// once at startup from CPU capabilities and can be overridden for
// equivalence testing (set_active_isa) or via the MPCM_ISA environment
// variable ("scalar", "avx2", "neon").
//
// Aliasing contract: inputs and outputs must not overlap, except that
// axpy/madd accumulate in place into their destination.

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa detect_best_isa();
Isa active_isa();
void set_active_isa(Isa isa);  // throws InvalidInputError if unsupported here

template <typename T>
struct Kernels {
  // r = sum_i x[i]*y[i]
  T (*dot)(const T* x, const T* y, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(T alpha, const T* x, T* y, std::size_t n);
  // out[i] = x[i] + y[i]
  void (*add)(const T* x, const T* y, T* out, std::size_t n);
  // out[i] = x[i] * y[i]
  void (*mul)(const T* x, const T* y, T* out, std::size_t n);
  // out[i] += x[i] * y[i]
  void (*madd)(const T* x, const T* y, T* out, std::size_t n);
  // out[i] = alpha * x[i]
  void (*scale)(T alpha, const T* x, T* out, std::size_t n);
  T (*sum)(const T* x, std::size_t n);
  T (*sumsq)(const T* x, std::size_t n);
  // C[m x n] += A[m x k] * B[k x n], all row-major
  void (*gemm)(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n);
};

template <typename T>
const Kernels<T>& table(Isa isa);

template <typename T>
const Kernels<T>& active();

template <> const Kernels<float>& table<float>(Isa);
template <> const Kernels<double>& table<double>(Isa);
template <> const Kernels<float>& active<float>();
template <> const Kernels<double>& active<double>();

namespace detail {
extern const Kernels<float> scalar_f32;
extern const Kernels<double> scalar_f64;
// Null when the build target cannot emit the variant.
extern const Kernels<float>* const avx2_f32;
extern const Kernels<double>* const avx2_f64;
extern const Kernels<float>* const neon_f32;
extern const Kernels<double>* const neon_f64;
}  // namespace detail

}  // namespace mpcm::kernels
