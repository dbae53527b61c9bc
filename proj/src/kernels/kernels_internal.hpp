#pragma once

#include "mixplan/kernels.hpp"

namespace mixplan::kernels::detail {

inline constexpr double inv_sqrt2 = 0.70710678118654752440;
inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;

#if defined(MIXPLAN_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

}  // namespace mixplan::kernels::detail
