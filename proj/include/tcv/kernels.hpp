#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and, on x86-64,
// an AVX2+FMA variant chosen at runtime. All spans of one call must have equal
// length unless stated otherwise.

#include <cstddef>
#include <span>
#include <string_view>

namespace tcv::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b) noexcept;

struct MteCoefficients {
  double thermal;  // c_p / T_r
  double latent;   // eps * L^2 / (c_p * T_r)
};

struct KernelTable {
  Backend backend;

  /// out[i] = row_term + col_scale * col_terms[i]; the haversine "h" for one
  /// grid row against a fixed centre.
  void (*haversine_row)(double row_term, double col_scale, std::span<const double> col_terms,
                        std::span<double> out);

  /// Interior centred-difference vorticity for one row:
  /// out[i] = (v[i+1]-v[i-1])*inv_2dx - (u_north[i]-u_south[i])*inv_2dy for
  /// i in [1, n-1). Elements 0 and n-1 of out are left untouched.
  void (*vorticity_row)(std::span<const double> v_row, std::span<const double> u_north,
                        std::span<const double> u_south, double inv_2dx, double inv_2dy,
                        std::span<double> out);

  /// out[i] = 0.5*(u^2+v^2) + thermal*t^2 + latent*q^2
  void (*mte)(std::span<const double> u, std::span<const double> v, std::span<const double> t,
              std::span<const double> q, MteCoefficients c, std::span<double> out);

  /// acc[i] += x[i]
  void (*accumulate)(std::span<const double> x, std::span<double> acc);

  /// out[i] = a[i] * s
  void (*scale)(std::span<const double> a, double s, std::span<double> out);

  /// out[i] = a[i] - b[i]
  void (*subtract)(std::span<const double> a, std::span<const double> b, std::span<double> out);

  /// acc[i] = max(acc[i], x[i])
  void (*max_inplace)(std::span<const double> x, std::span<double> acc);
};

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_kernels() noexcept;

/// The process-wide choice: TCV_SIMD=scalar|avx2|auto (default auto picks the
/// widest supported variant). Resolved once on first use.
const KernelTable& active() noexcept;

}  // namespace tcv::kernels
