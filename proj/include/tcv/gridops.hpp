#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tcv/grid.hpp"

namespace tcv {

enum class ExtremeMode { Min, Max };

struct GridHit {
  double value = 0.0;
  GeoPoint where;
  std::size_t j = 0;
  std::size_t i = 0;
  double distance_km = 0.0;
};

/// Visits every grid point within radius_km (haversine) of center, row by row.
/// The haversine term of each row is evaluated by the active SIMD kernel.
void for_each_in_radius(const GridSpec& spec, GeoPoint center, double radius_km,
                        const std::function<void(std::size_t j, std::size_t i, double dist_km)>& fn);

/// zeta = dv/dx - du/dy on the sphere with dx = R cos(lat) dlon and dy = R dlat.
/// Centred differences inside, one-sided at non-periodic edges; rows poleward
/// of +-89 degrees come back masked. Throws SpecMismatch.
Field relative_vorticity(const Field& u, const Field& v);

/// Every factor-th point from the grid origin. Throws IncompatibleFactor when
/// factor < 2 or the extents are not divisible.
Field downsample(const Field& f, int factor);

/// Bilinear interpolation onto target. Throws DomainMismatch when any target
/// point falls outside f's domain.
Field upsample(const Field& f, const GridSpec& target);

/// Extreme value among unmasked points within radius_km. Ties go to the point
/// nearest the centre, then to the smallest (row, column). Throws
/// EmptyNeighborhood.
GridHit neighborhood_extreme(const Field& f, GeoPoint center, double radius_km, ExtremeMode mode);

/// Points within the region that are strictly more extreme than all eight
/// neighbours, sorted by distance to center (then index). Edge points without a
/// full neighbourhood never qualify.
std::vector<GridHit> local_extrema(const Field& f, GeoPoint center, double radius_km, ExtremeMode mode);

Field wind_speed(const Field& u, const Field& v);

/// a - b pointwise (e.g. geopotential thickness). Throws SpecMismatch.
Field difference(const Field& a, const Field& b, Variable result_var);

}  // namespace tcv
