#include <arm_neon.h>

#include "backends.hpp"

namespace systolic3d::kernels::detail {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(x + i), va, vld1q_f64(y + i)));
  for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void stencil_apply(const Stencil& s, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + 2 <= s.n; i += 2) {
    float64x2_t acc = vmulq_f64(vld1q_f64(s.diag + i), vld1q_f64(x + i));
    for (std::size_t k = 0; k < 6; ++k) {
      const double* xn = x + static_cast<std::ptrdiff_t>(i) + s.offset[k];
      acc = vfmsq_f64(acc, vld1q_f64(s.coeff[k] + i), vld1q_f64(xn));
    }
    vst1q_f64(y + i, acc);
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
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vfmsq_f64(vld1q_f64(rhs + i), vld1q_f64(lower + i), vld1q_f64(prev + i));
    vst1q_f64(out + i, vmulq_f64(v, vld1q_f64(inv + i)));
  }
  for (; i < n; ++i) out[i] = (rhs[i] - lower[i] * prev[i]) * inv[i];
}

void line_backward(const double* upper, const double* next, double* inout, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(inout + i, vfmsq_f64(vld1q_f64(inout + i), vld1q_f64(upper + i), vld1q_f64(next + i)));
  for (; i < n; ++i) inout[i] -= upper[i] * next[i];
}

}  // namespace

const Table& neon_table() {
  static const Table t{Backend::Neon, dot, axpy, xpay, stencil_apply, line_forward, line_backward};
  return t;
}

}  // namespace systolic3d::kernels::detail
