#include "systolic3d/kernels.hpp"

namespace systolic3d::kernels {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

void stencil_apply(const Stencil& s, const double* x, double* y) {
  for (std::size_t i = 0; i < s.n; ++i) {
    double acc = s.diag[i] * x[i];
    for (std::size_t k = 0; k < 6; ++k) {
      acc -= s.coeff[k][i] * x[static_cast<std::ptrdiff_t>(i) + s.offset[k]];
    }
    y[i] = acc;
  }
}

void line_forward(const double* rhs, const double* lower, const double* prev, const double* inv,
                  double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (rhs[i] - lower[i] * prev[i]) * inv[i];
}

void line_backward(const double* upper, const double* next, double* inout, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) inout[i] -= upper[i] * next[i];
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Backend::Scalar, dot, axpy, xpay, stencil_apply, line_forward, line_backward};
  return t;
}

}  // namespace systolic3d::kernels
