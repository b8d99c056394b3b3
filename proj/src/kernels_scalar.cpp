#include <algorithm>

#include "tcv/kernels.hpp"

namespace tcv::kernels {
namespace {

void haversine_row(double row_term, double col_scale, std::span<const double> col_terms,
                   std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = row_term + col_scale * col_terms[i];
}

void vorticity_row(std::span<const double> v, std::span<const double> un,
                   std::span<const double> us, double inv_2dx, double inv_2dy,
                   std::span<double> out) {
  const std::size_t n = out.size();
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (v[i + 1] - v[i - 1]) * inv_2dx - (un[i] - us[i]) * inv_2dy;
}

void mte(std::span<const double> u, std::span<const double> v, std::span<const double> t,
         std::span<const double> q, MteCoefficients c, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 0.5 * (u[i] * u[i] + v[i] * v[i]) + c.thermal * (t[i] * t[i]) +
             c.latent * (q[i] * q[i]);
}

void accumulate(std::span<const double> x, std::span<double> acc) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

void scale(std::span<const double> a, double s, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * s;
}

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
}

void max_inplace(std::span<const double> x, std::span<double> acc) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = std::max(acc[i], x[i]);
}

constexpr KernelTable kScalar{Backend::Scalar, haversine_row, vorticity_row, mte,
                              accumulate,      scale,         subtract,      max_inplace};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace tcv::kernels
