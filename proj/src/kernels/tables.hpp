#pragma once

#include "sopm/kernels.hpp"

namespace sopm::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(SOPM_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace sopm::kernels::detail
