#include "mpcm/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define MPCM_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define MPCM_HAVE_AVX2_BUILD 0
#endif

namespace mpcm::kernels {

#if MPCM_HAVE_AVX2_BUILD

#define MPCM_AVX2 __attribute__((target("avx2,fma")))

namespace {

MPCM_AVX2 inline double hsum256(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

MPCM_AVX2 inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

// ---- double, 4 lanes ----

MPCM_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double r = hsum256(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

MPCM_AVX2 void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, v);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

MPCM_AVX2 void add_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

MPCM_AVX2 void mul_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

MPCM_AVX2 void madd_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                                _mm256_loadu_pd(out + i));
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) out[i] += x[i] * y[i];
}

MPCM_AVX2 void scale_avx2(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(a, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

MPCM_AVX2 double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum256(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

MPCM_AVX2 double sumsq_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double r = hsum256(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

MPCM_AVX2 void gemm_avx2(const double* a, const double* b, double* c, std::size_t m,
                         std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aval = a[i * k + p];
      const double* brow = b + p * n;
      const __m256d av = _mm256_set1_pd(aval);
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d v = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), _mm256_loadu_pd(crow + j));
        _mm256_storeu_pd(crow + j, v);
      }
      for (; j < n; ++j) crow[j] += aval * brow[j];
    }
  }
}

// ---- float, 8 lanes ----

MPCM_AVX2 float dot_avx2f(const float* x, const float* y, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc);
  float r = hsum256(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

MPCM_AVX2 void axpy_avx2f(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 a = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_fmadd_ps(a, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i));
    _mm256_storeu_ps(y + i, v);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

MPCM_AVX2 void add_avx2f(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

MPCM_AVX2 void mul_avx2f(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

MPCM_AVX2 void madd_avx2f(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i),
                               _mm256_loadu_ps(out + i));
    _mm256_storeu_ps(out + i, v);
  }
  for (; i < n; ++i) out[i] += x[i] * y[i];
}

MPCM_AVX2 void scale_avx2f(float alpha, const float* x, float* out, std::size_t n) {
  const __m256 a = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(a, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

MPCM_AVX2 float sum_avx2f(const float* x, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float r = hsum256(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

MPCM_AVX2 float sumsq_avx2f(const float* x, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    acc = _mm256_fmadd_ps(v, v, acc);
  }
  float r = hsum256(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

MPCM_AVX2 void gemm_avx2f(const float* a, const float* b, float* c, std::size_t m,
                          std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    float* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const float aval = a[i * k + p];
      const float* brow = b + p * n;
      const __m256 av = _mm256_set1_ps(aval);
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8) {
        __m256 v = _mm256_fmadd_ps(av, _mm256_loadu_ps(brow + j), _mm256_loadu_ps(crow + j));
        _mm256_storeu_ps(crow + j, v);
      }
      for (; j < n; ++j) crow[j] += aval * brow[j];
    }
  }
}

const Kernels<double> avx2_table_f64 = {
    dot_avx2, axpy_avx2, add_avx2, mul_avx2, madd_avx2,
    scale_avx2, sum_avx2, sumsq_avx2, gemm_avx2,
};

const Kernels<float> avx2_table_f32 = {
    dot_avx2f, axpy_avx2f, add_avx2f, mul_avx2f, madd_avx2f,
    scale_avx2f, sum_avx2f, sumsq_avx2f, gemm_avx2f,
};

}  // namespace

namespace detail {
const Kernels<double>* const avx2_f64 = &avx2_table_f64;
const Kernels<float>* const avx2_f32 = &avx2_table_f32;
}  // namespace detail

#else

namespace detail {
const Kernels<double>* const avx2_f64 = nullptr;
const Kernels<float>* const avx2_f32 = nullptr;
}  // namespace detail

#endif

}  // namespace mpcm::kernels
