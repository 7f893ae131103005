#include "mpcm/kernels/kernels.hpp"

namespace mpcm::kernels {
namespace {

template <typename T>
T dot_scalar(const T* x, const T* y, std::size_t n) {
  T acc{0};
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <typename T>
void axpy_scalar(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void add_scalar(const T* x, const T* y, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

template <typename T>
void mul_scalar(const T* x, const T* y, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

template <typename T>
void madd_scalar(const T* x, const T* y, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += x[i] * y[i];
}

template <typename T>
void scale_scalar(T alpha, const T* x, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

template <typename T>
T sum_scalar(const T* x, std::size_t n) {
  T acc{0};
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

template <typename T>
T sumsq_scalar(const T* x, std::size_t n) {
  T acc{0};
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

// Row-major C += A*B via rank-1 row updates; keeps the inner loop
// contiguous over B and C rows.
template <typename T>
void gemm_scalar(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T aval = a[i * k + p];
      if (aval == T{0}) continue;
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aval * brow[j];
    }
  }
}

template <typename T>
constexpr Kernels<T> make_scalar_table() {
  return Kernels<T>{
      dot_scalar<T>, axpy_scalar<T>, add_scalar<T>,   mul_scalar<T>,  madd_scalar<T>,
      scale_scalar<T>, sum_scalar<T>, sumsq_scalar<T>, gemm_scalar<T>,
  };
}

}  // namespace

namespace detail {
const Kernels<float> scalar_f32 = make_scalar_table<float>();
const Kernels<double> scalar_f64 = make_scalar_table<double>();
}  // namespace detail

}  // namespace mpcm::kernels
