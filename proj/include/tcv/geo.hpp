#pragma once

#include <span>

namespace tcv {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Longitude into [-180, 180).
double normalize_lon(double lon) noexcept;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  /// Validates lat in [-90, 90] and normalizes lon; throws InvalidArgument.
  static GeoPoint make(double lat, double lon);

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Vec3 {
  double x, y, z;
};

Vec3 to_unit(GeoPoint p) noexcept;
GeoPoint from_vec(Vec3 v) noexcept;

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(GeoPoint a, GeoPoint b) noexcept;

/// Initial bearing a -> b, degrees clockwise from north in [0, 360).
/// Throws CoincidentPoints when a and b agree within 1e-9 degrees, and
/// InvalidArgument for antipodal pairs (bearing undefined).
double azimuth_deg(GeoPoint a, GeoPoint b);

/// Point reached travelling `distance_km` from `start` on the initial
/// bearing `bearing_deg`.
GeoPoint destination(GeoPoint start, double bearing_deg, double distance_km) noexcept;

/// Slerp along the minor arc, frac in [0, 1].
GeoPoint gc_interpolate(GeoPoint a, GeoPoint b, double frac) noexcept;

/// Shortest distance from p to the minor great-circle arc a-b.
double point_segment_km(GeoPoint p, GeoPoint a, GeoPoint b) noexcept;

/// Normalized mean of unit vectors. Empty input is a precondition violation.
GeoPoint spherical_centroid(std::span<const GeoPoint> points);

/// East/north offset (km) of p in the local tangent frame at origin, built from
/// the great-circle distance and bearing (exact mirror symmetry across the equator).
struct LocalOffset {
  double east_km;
  double north_km;
};
LocalOffset local_offset(GeoPoint origin, GeoPoint p) noexcept;

}  // namespace tcv
