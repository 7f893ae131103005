#include "mpcm/kernels/kernels.hpp"

#if defined(__aarch64__)
#define MPCM_HAVE_NEON_BUILD 1
#include <arm_neon.h>
#else
#define MPCM_HAVE_NEON_BUILD 0
#endif

namespace mpcm::kernels {

#if MPCM_HAVE_NEON_BUILD

namespace {

// ---- double, 2 lanes ----

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), a, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void add_neon(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void mul_neon(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void madd_neon(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] += x[i] * y[i];
}

void scale_neon(double alpha, const double* x, double* out, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(a, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

double sum_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double sumsq_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

void gemm_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aval = a[i * k + p];
      const double* brow = b + p * n;
      const float64x2_t av = vdupq_n_f64(aval);
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2)
        vst1q_f64(crow + j, vfmaq_f64(vld1q_f64(crow + j), av, vld1q_f64(brow + j)));
      for (; j < n; ++j) crow[j] += aval * brow[j];
    }
  }
}

// ---- float, 4 lanes ----

float dot_neonf(const float* x, const float* y, std::size_t n) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = vfmaq_f32(acc, vld1q_f32(x + i), vld1q_f32(y + i));
  float r = vaddvq_f32(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

void axpy_neonf(float alpha, const float* x, float* y, std::size_t n) {
  const float32x4_t a = vdupq_n_f32(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), a, vld1q_f32(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void add_neonf(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vst1q_f32(out + i, vaddq_f32(vld1q_f32(x + i), vld1q_f32(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void mul_neonf(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vst1q_f32(out + i, vmulq_f32(vld1q_f32(x + i), vld1q_f32(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void madd_neonf(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vst1q_f32(out + i, vfmaq_f32(vld1q_f32(out + i), vld1q_f32(x + i), vld1q_f32(y + i)));
  for (; i < n; ++i) out[i] += x[i] * y[i];
}

void scale_neonf(float alpha, const float* x, float* out, std::size_t n) {
  const float32x4_t a = vdupq_n_f32(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vmulq_f32(a, vld1q_f32(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

float sum_neonf(const float* x, std::size_t n) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = vaddq_f32(acc, vld1q_f32(x + i));
  float r = vaddvq_f32(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

float sumsq_neonf(const float* x, std::size_t n) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t v = vld1q_f32(x + i);
    acc = vfmaq_f32(acc, v, v);
  }
  float r = vaddvq_f32(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

void gemm_neonf(const float* a, const float* b, float* c, std::size_t m, std::size_t k,
                std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    float* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const float aval = a[i * k + p];
      const float* brow = b + p * n;
      const float32x4_t av = vdupq_n_f32(aval);
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4)
        vst1q_f32(crow + j, vfmaq_f32(vld1q_f32(crow + j), av, vld1q_f32(brow + j)));
      for (; j < n; ++j) crow[j] += aval * brow[j];
    }
  }
}

const Kernels<double> neon_table_f64 = {
    dot_neon, axpy_neon, add_neon, mul_neon, madd_neon,
    scale_neon, sum_neon, sumsq_neon, gemm_neon,
};

const Kernels<float> neon_table_f32 = {
    dot_neonf, axpy_neonf, add_neonf, mul_neonf, madd_neonf,
    scale_neonf, sum_neonf, sumsq_neonf, gemm_neonf,
};

}  // namespace

namespace detail {
const Kernels<double>* const neon_f64 = &neon_table_f64;
const Kernels<float>* const neon_f32 = &neon_table_f32;
}  // namespace detail

#else

namespace detail {
const Kernels<double>* const neon_f64 = nullptr;
const Kernels<float>* const neon_f32 = nullptr;
}  // namespace detail

#endif

}  // namespace mpcm::kernels
