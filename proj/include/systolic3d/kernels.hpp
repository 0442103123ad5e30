#pragma once
// Double-precision vector kernels behind the thermal solver. Each backend
// implements the same table; the scalar one is the reference and the SIMD
// ones are checked against it in tests. The active backend is picked once at
// first use from what the CPU supports.

#include <array>
#include <cstddef>
#include <string_view>

namespace systolic3d::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend b);

// Seven-point operator in diagonal storage:
//   y[i] = diag[i] * x[i] - sum_k coeff[k][i] * x[i + offset[k]]
// x must be readable at every i + offset[k] for i in [0, n); coefficients are
// zero wherever the neighbour does not exist.
struct Stencil {
  const double* diag = nullptr;
  std::array<const double*, 6> coeff{};
  std::array<std::ptrdiff_t, 6> offset{};
  std::size_t n = 0;
};

struct Table {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y = x + a * y
  void (*xpay)(const double* x, double a, double* y, std::size_t n);
  void (*stencil_apply)(const Stencil& s, const double* x, double* y);
  // out = (rhs - lower * prev) * inv
  void (*line_forward)(const double* rhs, const double* lower, const double* prev,
                       const double* inv, double* out, std::size_t n);
  // inout -= upper * next
  void (*line_backward)(const double* upper, const double* next, double* inout, std::size_t n);
};

const Table& scalar_table();
bool available(Backend b);
// Throws std::invalid_argument when the backend is not available here.
const Table& table(Backend b);

const Table& active();
void set_active(Backend b);

}  // namespace systolic3d::kernels
