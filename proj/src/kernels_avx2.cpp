// Compiled with -mavx2 -mfma. Nothing here may run before the dispatcher has
// confirmed CPU support.
#include <immintrin.h>

#include <algorithm>

#include "kernels_internal.hpp"

namespace tcv::kernels::detail {
namespace {

constexpr std::size_t kLanes = 4;

void haversine_row(double row_term, double col_scale, std::span<const double> col_terms,
                   std::span<double> out) {
  const std::size_t n = out.size();
  const __m256d r = _mm256_set1_pd(row_term);
  const __m256d s = _mm256_set1_pd(col_scale);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d c = _mm256_loadu_pd(col_terms.data() + i);
    _mm256_storeu_pd(out.data() + i, _mm256_fmadd_pd(s, c, r));
  }
  for (; i < n; ++i) out[i] = row_term + col_scale * col_terms[i];
}

void vorticity_row(std::span<const double> v, std::span<const double> un,
                   std::span<const double> us, double inv_2dx, double inv_2dy,
                   std::span<double> out) {
  const std::size_t n = out.size();
  if (n < 3) return;
  const __m256d ax = _mm256_set1_pd(inv_2dx);
  const __m256d ay = _mm256_set1_pd(inv_2dy);
  std::size_t i = 1;
  for (; i + kLanes <= n - 1; i += kLanes) {
    __m256d dv = _mm256_sub_pd(_mm256_loadu_pd(v.data() + i + 1), _mm256_loadu_pd(v.data() + i - 1));
    __m256d du = _mm256_sub_pd(_mm256_loadu_pd(un.data() + i), _mm256_loadu_pd(us.data() + i));
    _mm256_storeu_pd(out.data() + i, _mm256_fmsub_pd(dv, ax, _mm256_mul_pd(du, ay)));
  }
  for (; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) * inv_2dx - (un[i] - us[i]) * inv_2dy;
}

void mte(std::span<const double> u, std::span<const double> v, std::span<const double> t,
         std::span<const double> q, MteCoefficients c, std::span<double> out) {
  const std::size_t n = out.size();
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d ct = _mm256_set1_pd(c.thermal);
  const __m256d cq = _mm256_set1_pd(c.latent);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d uu = _mm256_loadu_pd(u.data() + i);
    __m256d vv = _mm256_loadu_pd(v.data() + i);
    __m256d tt = _mm256_loadu_pd(t.data() + i);
    __m256d qq = _mm256_loadu_pd(q.data() + i);
    __m256d ke = _mm256_mul_pd(half, _mm256_fmadd_pd(uu, uu, _mm256_mul_pd(vv, vv)));
    __m256d th = _mm256_mul_pd(ct, _mm256_mul_pd(tt, tt));
    __m256d lt = _mm256_mul_pd(cq, _mm256_mul_pd(qq, qq));
    _mm256_storeu_pd(out.data() + i, _mm256_add_pd(_mm256_add_pd(ke, th), lt));
  }
  for (; i < n; ++i)
    out[i] = 0.5 * (u[i] * u[i] + v[i] * v[i]) + c.thermal * (t[i] * t[i]) +
             c.latent * (q[i] * q[i]);
}

void accumulate(std::span<const double> x, std::span<double> acc) {
  const std::size_t n = acc.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(acc.data() + i,
                     _mm256_add_pd(_mm256_loadu_pd(acc.data() + i), _mm256_loadu_pd(x.data() + i)));
  for (; i < n; ++i) acc[i] += x[i];
}

void scale(std::span<const double> a, double s, std::span<double> out) {
  const std::size_t n = out.size();
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i), sv));
  for (; i < n; ++i) out[i] = a[i] * s;
}

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    _mm256_storeu_pd(out.data() + i,
                     _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void max_inplace(std::span<const double> x, std::span<double> acc) {
  const std::size_t n = acc.size();
  std::size_t i = 0;
  // _mm256_max_pd returns the second operand when either is NaN; order the
  // operands so it matches std::max(acc, x) (which keeps acc on NaN x).
  for (; i + kLanes <= n; i += kLanes) {
    __m256d a = _mm256_loadu_pd(acc.data() + i);
    __m256d b = _mm256_loadu_pd(x.data() + i);
    __m256d lt = _mm256_cmp_pd(a, b, _CMP_LT_OQ);
    _mm256_storeu_pd(acc.data() + i, _mm256_blendv_pd(a, b, lt));
  }
  for (; i < n; ++i) acc[i] = std::max(acc[i], x[i]);
}

constexpr KernelTable kAvx2{Backend::Avx2, haversine_row, vorticity_row, mte,
                            accumulate,    scale,         subtract,      max_inplace};

}  // namespace

const KernelTable& avx2_table() noexcept { return kAvx2; }

}  // namespace tcv::kernels::detail
