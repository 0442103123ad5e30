// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "backends.hpp"

namespace systolic3d::kernels::detail {

namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void stencil_apply(const Stencil& s, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + 4 <= s.n; i += 4) {
    __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(s.diag + i), _mm256_loadu_pd(x + i));
    for (std::size_t k = 0; k < 6; ++k) {
      const double* xn = x + static_cast<std::ptrdiff_t>(i) + s.offset[k];
      acc = _mm256_fnmadd_pd(_mm256_loadu_pd(s.coeff[k] + i), _mm256_loadu_pd(xn), acc);
    }
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < s.n; ++i) {
    double acc = s.diag[i] * x[i];
    for (std::size_t k = 0; k < 6; ++k)
      acc -= s.coeff[k][i] * x[static_cast<std::ptrdiff_t>(i) + s.offset[k]];
    y[i] = acc;
  }
}

void line_forward(const double* rhs, const double* lower, const double* prev, const double* inv,
                  double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_fnmadd_pd(_mm256_loadu_pd(lower + i), _mm256_loadu_pd(prev + i),
                                 _mm256_loadu_pd(rhs + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(v, _mm256_loadu_pd(inv + i)));
  }
  for (; i < n; ++i) out[i] = (rhs[i] - lower[i] * prev[i]) * inv[i];
}

void line_backward(const double* upper, const double* next, double* inout, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(inout + i, _mm256_fnmadd_pd(_mm256_loadu_pd(upper + i),
                                                 _mm256_loadu_pd(next + i),
                                                 _mm256_loadu_pd(inout + i)));
  }
  for (; i < n; ++i) inout[i] -= upper[i] * next[i];
}

}  // namespace

const Table& avx2_table() {
  static const Table t{Backend::Avx2, dot, axpy, xpay, stencil_apply, line_forward, line_backward};
  return t;
}

}  // namespace systolic3d::kernels::detail
