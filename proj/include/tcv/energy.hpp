#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tcv/grid.hpp"

namespace tcv {

struct MteParams {
  double t_ref = 270.0;        // K
  double c_p = 1005.7;         // J kg-1 K-1
  double latent_heat = 2.51e6; // J kg-1
  double epsilon = 1.0;        // weight of the moist term

  void validate() const;
  double thermal_coef() const { return c_p / t_ref; }
  double latent_coef() const { return epsilon * latent_heat * latent_heat / (c_p * t_ref); }
};

/// Deviations of one member from the ensemble mean at one level and time.
struct PerturbationSet {
  int member_id = 0;
  Level level;
  Timestamp valid_time{};
  Field u, v, t, q;
};

/// Member-minus-mean fields for u, v, T and q at `level`. Throws
/// TooFewMembers (< 2), MissingVariable, SpecMismatch.
std::vector<PerturbationSet> perturbations(std::span<const FieldSet> members, Level level);

/// Member-minus-mean of a plain field list (same grid).
std::vector<Field> deviations(std::span<const Field> members);

/// 0.5(u'^2+v'^2) + (c_p/T_r) T'^2 + eps L^2/(c_p T_r) q'^2 per grid point.
Field mte(const PerturbationSet& p, const MteParams& params);

struct MteTerms {
  Field kinetic, thermal, latent;
};
MteTerms mte_terms(const PerturbationSet& p, const MteParams& params);

struct MteResult {
  std::vector<Field> members;
  Field mean;
};
MteResult mte(std::span<const PerturbationSet> set, const MteParams& params);

/// cos(lat)-weighted mean over unmasked points, optionally restricted to a
/// lat/lon box (lat_min, lat_max, lon_min, lon_max).
struct Region {
  double lat_min = -90, lat_max = 90, lon_min = -180, lon_max = 180;
  bool contains(GeoPoint p) const noexcept;
};
double area_mean(const Field& f, const std::optional<Region>& region = std::nullopt);

}  // namespace tcv
