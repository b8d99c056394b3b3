#pragma once

#include "tcv/kernels.hpp"

namespace tcv::kernels::detail {

#if defined(TCV_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

}  // namespace tcv::kernels::detail
