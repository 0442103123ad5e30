#include <atomic>
#include <stdexcept>
#include <string>

#include "backends.hpp"

namespace systolic3d::kernels {

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "scalar";
}

bool available(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if defined(SYSTOLIC3D_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(SYSTOLIC3D_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Table& table(Backend b) {
  if (!available(b))
    throw std::invalid_argument("kernel backend '" + std::string(to_string(b)) +
                                "' is not available on this machine");
  switch (b) {
#if defined(SYSTOLIC3D_HAVE_AVX2)
    case Backend::Avx2: return detail::avx2_table();
#endif
#if defined(SYSTOLIC3D_HAVE_NEON)
    case Backend::Neon: return detail::neon_table();
#endif
    default: return scalar_table();
  }
}

namespace {

const Table* best() {
  if (available(Backend::Avx2)) return &table(Backend::Avx2);
  if (available(Backend::Neon)) return &table(Backend::Neon);
  return &scalar_table();
}

std::atomic<const Table*>& slot() {
  static std::atomic<const Table*> current{best()};
  return current;
}

}  // namespace

const Table& active() { return *slot().load(std::memory_order_acquire); }

void set_active(Backend b) { slot().store(&table(b), std::memory_order_release); }

}  // namespace systolic3d::kernels
