#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "systolic3d/kernels.hpp"

using namespace systolic3d;
using kernels::Backend;

namespace {

std::vector<double> randoms(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<Backend> simd_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Avx2, Backend::Neon})
    if (kernels::available(b)) out.push_back(b);
  return out;
}

}  // namespace

TEST_CASE("scalar backend is always there") {
  CHECK(kernels::available(Backend::Scalar));
  CHECK(kernels::table(Backend::Scalar).backend == Backend::Scalar);
  MESSAGE("active backend: " << kernels::to_string(kernels::active().backend));
}

TEST_CASE("unavailable backends are refused") {
  for (Backend b : {Backend::Avx2, Backend::Neon})
    if (!kernels::available(b)) CHECK_THROWS_AS(kernels::table(b), std::invalid_argument);
}

TEST_CASE("scalar kernels on hand-checked inputs") {
  const auto& k = kernels::scalar_table();
  const double a[] = {1, 2, 3};
  const double b[] = {4, -5, 6};
  CHECK(k.dot(a, b, 3) == 12.0);
  double y[] = {1, 1, 1};
  k.axpy(2.0, a, y, 3);
  CHECK(y[2] == 7.0);
  k.xpay(a, 0.5, y, 3);
  CHECK(y[0] == 2.5);
  double out[3];
  k.line_forward(b, a, a, b, out, 3);  // (b - a*a) * b
  CHECK(out[1] == (-5.0 - 4.0) * -5.0);
  k.line_backward(a, a, out, 3);
  CHECK(out[0] == (4.0 - 1.0) * 4.0 - 1.0);
}

TEST_CASE("simd backends match the scalar reference") {
  const auto& ref = kernels::scalar_table();
  std::mt19937_64 rng(17);
  for (Backend be : simd_backends()) {
    const auto& k = kernels::table(be);
    CAPTURE(kernels::to_string(be));
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 64u, 1023u, 4099u}) {
      CAPTURE(n);
      auto x = randoms(rng, n), y = randoms(rng, n), z = randoms(rng, n), w = randoms(rng, n);
      CHECK(k.dot(x.data(), y.data(), n) == doctest::Approx(ref.dot(x.data(), y.data(), n)).epsilon(1e-12));

      auto y1 = y, y2 = y;
      ref.axpy(0.75, x.data(), y1.data(), n);
      k.axpy(0.75, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-14));

      y1 = y;
      y2 = y;
      ref.xpay(x.data(), -1.25, y1.data(), n);
      k.xpay(x.data(), -1.25, y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-14));

      std::vector<double> o1(n), o2(n);
      ref.line_forward(x.data(), y.data(), z.data(), w.data(), o1.data(), n);
      k.line_forward(x.data(), y.data(), z.data(), w.data(), o2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(o2[i] == doctest::Approx(o1[i]).epsilon(1e-14));
      ref.line_backward(y.data(), z.data(), o1.data(), n);
      k.line_backward(y.data(), z.data(), o2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(o2[i] == doctest::Approx(o1[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("simd stencil matches the scalar reference") {
  std::mt19937_64 rng(23);
  const std::size_t nx = 7, ny = 5, nl = 4, plane = nx * ny, n = plane * nl;
  std::vector<double> diag = randoms(rng, n);
  std::array<std::vector<double>, 6> coeff;
  for (auto& c : coeff) c = randoms(rng, n);
  std::vector<double> padded(n + 2 * plane, 0.0);
  const auto body = randoms(rng, n);
  std::copy(body.begin(), body.end(), padded.begin() + plane);

  kernels::Stencil st;
  st.diag = diag.data();
  for (std::size_t k = 0; k < 6; ++k) st.coeff[k] = coeff[k].data();
  st.offset = {-1, 1, -static_cast<std::ptrdiff_t>(nx), static_cast<std::ptrdiff_t>(nx),
               -static_cast<std::ptrdiff_t>(plane), static_cast<std::ptrdiff_t>(plane)};
  st.n = n;

  std::vector<double> expect(n), got(n);
  kernels::scalar_table().stencil_apply(st, padded.data() + plane, expect.data());
  // Direct evaluation from the definition.
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag[i] * padded[plane + i];
    for (std::size_t k = 0; k < 6; ++k)
      acc -= coeff[k][i] * padded[static_cast<std::ptrdiff_t>(plane + i) + st.offset[k]];
    CHECK(expect[i] == doctest::Approx(acc).epsilon(1e-14));
  }
  for (Backend be : simd_backends()) {
    kernels::table(be).stencil_apply(st, padded.data() + plane, got.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-13));
  }
}

TEST_CASE("switching the active backend") {
  const Backend before = kernels::active().backend;
  kernels::set_active(Backend::Scalar);
  CHECK(kernels::active().backend == Backend::Scalar);
  kernels::set_active(before);
  CHECK(kernels::active().backend == before);
}
