#pragma once

#include "systolic3d/kernels.hpp"

namespace systolic3d::kernels::detail {

#if defined(SYSTOLIC3D_HAVE_AVX2)
const Table& avx2_table();
#endif
#if defined(SYSTOLIC3D_HAVE_NEON)
const Table& neon_table();
#endif

}  // namespace systolic3d::kernels::detail
