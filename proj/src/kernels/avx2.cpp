#include "entrylab/kernels.hpp"

#if defined(ENTRYLAB_HAVE_AVX2_TU)

#include <immintrin.h>

namespace entrylab::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv(ConstMatrixView a, const double* x, double* y) {
  std::size_t i = 0;
  // Four rows at a time share the loads of x.
  for (; i + 4 <= a.rows; i += 4) {
    const double* r0 = a.row(i);
    const double* r1 = a.row(i + 1);
    const double* r2 = a.row(i + 2);
    const double* r3 = a.row(i + 3);
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= a.cols; j += 4) {
      const __m256d xv = _mm256_loadu_pd(x + j);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + j), xv, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + j), xv, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + j), xv, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + j), xv, s3);
    }
    double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
    for (; j < a.cols; ++j) {
      t0 += r0[j] * x[j];
      t1 += r1[j] * x[j];
      t2 += r2[j] * x[j];
      t3 += r3[j] * x[j];
    }
    y[i] += t0;
    y[i + 1] += t1;
    y[i + 2] += t2;
    y[i + 3] += t3;
  }
  for (; i < a.rows; ++i) y[i] += dot(a.row(i), x, a.cols);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t(ConstMatrixView a, const double* x, double* y) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    if (x[i] == 0.0) continue;
    axpy(x[i], a.row(i), y, a.cols);
  }
}

void ger(MatrixView a, double alpha, const double* x, const double* y) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double s = alpha * x[i];
    if (s == 0.0) continue;
    axpy(s, y, a.row(i), a.cols);
  }
}

}  // namespace entrylab::kernels::avx2

#else

// Non-x86 builds: the avx2 namespace forwards to the scalar reference so the
// table is always complete; avx2_available() reports false.
namespace entrylab::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void gemv(ConstMatrixView a, const double* x, double* y) { scalar::gemv(a, x, y); }
void gemv_t(ConstMatrixView a, const double* x, double* y) { scalar::gemv_t(a, x, y); }
void ger(MatrixView a, double alpha, const double* x, const double* y) { scalar::ger(a, alpha, x, y); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
}  // namespace entrylab::kernels::avx2

#endif
