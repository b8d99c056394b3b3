#include "tcv/geo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcv/error.hpp"

namespace tcv {

double normalize_lon(double lon) noexcept {
  double r = std::fmod(lon + 180.0, 360.0);
  if (r < 0) r += 360.0;
  return r - 180.0;
}

GeoPoint GeoPoint::make(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0)
    throw Error(Errc::InvalidArgument,
                "invalid geo point (" + std::to_string(lat) + ", " + std::to_string(lon) + ")");
  return GeoPoint{lat, normalize_lon(lon)};
}

Vec3 to_unit(GeoPoint p) noexcept {
  const double phi = p.lat * kDegToRad;
  const double lam = p.lon * kDegToRad;
  return {std::cos(phi) * std::cos(lam), std::cos(phi) * std::sin(lam), std::sin(phi)};
}

GeoPoint from_vec(Vec3 v) noexcept {
  const double h = std::hypot(v.x, v.y);
  return {std::atan2(v.z, h) * kRadToDeg, normalize_lon(std::atan2(v.y, v.x) * kRadToDeg)};
}

namespace {

Vec3 cross(Vec3 a, Vec3 b) noexcept {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double dot(Vec3 a, Vec3 b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(Vec3 a) noexcept { return std::sqrt(dot(a, a)); }

double central_angle(Vec3 a, Vec3 b) noexcept { return std::atan2(norm(cross(a, b)), dot(a, b)); }

}  // namespace

double haversine_km(GeoPoint a, GeoPoint b) noexcept {
  const double p1 = a.lat * kDegToRad;
  const double p2 = b.lat * kDegToRad;
  const double sdp = std::sin(0.5 * (p2 - p1));
  const double sdl = std::sin(0.5 * (b.lon - a.lon) * kDegToRad);
  const double h = std::min(1.0, sdp * sdp + std::cos(p1) * std::cos(p2) * sdl * sdl);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double azimuth_deg(GeoPoint a, GeoPoint b) {
  if (std::abs(a.lat - b.lat) <= 1e-9 && std::abs(normalize_lon(b.lon - a.lon)) <= 1e-9)
    throw Error(Errc::CoincidentPoints, "azimuth of coincident points");
  if (haversine_km(a, b) >= kPi * kEarthRadiusKm * (1.0 - 1e-12))
    throw Error(Errc::InvalidArgument, "azimuth of antipodal points is undefined");
  const double p1 = a.lat * kDegToRad;
  const double p2 = b.lat * kDegToRad;
  const double dl = (b.lon - a.lon) * kDegToRad;
  const double y = std::sin(dl) * std::cos(p2);
  const double x = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  double az = std::atan2(y, x) * kRadToDeg;
  if (az < 0) az += 360.0;
  if (az >= 360.0) az -= 360.0;
  return az;
}

GeoPoint destination(GeoPoint start, double bearing_deg, double distance_km) noexcept {
  const double delta = distance_km / kEarthRadiusKm;
  const double theta = bearing_deg * kDegToRad;
  const double p1 = start.lat * kDegToRad;
  const double l1 = start.lon * kDegToRad;
  const double sp2 =
      std::sin(p1) * std::cos(delta) + std::cos(p1) * std::sin(delta) * std::cos(theta);
  const double p2 = std::asin(std::clamp(sp2, -1.0, 1.0));
  const double l2 = l1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(p1),
                                    std::cos(delta) - std::sin(p1) * sp2);
  return {p2 * kRadToDeg, normalize_lon(l2 * kRadToDeg)};
}

GeoPoint gc_interpolate(GeoPoint a, GeoPoint b, double frac) noexcept {
  const Vec3 va = to_unit(a);
  const Vec3 vb = to_unit(b);
  const double omega = central_angle(va, vb);
  if (omega < 1e-15) return a;
  const double s = std::sin(omega);
  const double wa = std::sin((1.0 - frac) * omega) / s;
  const double wb = std::sin(frac * omega) / s;
  return from_vec({wa * va.x + wb * vb.x, wa * va.y + wb * vb.y, wa * va.z + wb * vb.z});
}

double point_segment_km(GeoPoint p, GeoPoint a, GeoPoint b) noexcept {
  const Vec3 va = to_unit(a);
  const Vec3 vb = to_unit(b);
  const Vec3 vp = to_unit(p);
  Vec3 n = cross(va, vb);
  const double nn = norm(n);
  const double endpoint = std::min(haversine_km(p, a), haversine_km(p, b));
  if (nn < 1e-12) return endpoint;
  n = {n.x / nn, n.y / nn, n.z / nn};
  const double s = dot(vp, n);
  // Foot of the perpendicular on the great circle; inside the arc iff it lies
  // between a and b in the rotation sense of n.
  const Vec3 foot{vp.x - s * n.x, vp.y - s * n.y, vp.z - s * n.z};
  if (norm(foot) < 1e-15) return endpoint;
  const bool inside = dot(cross(va, foot), n) >= 0.0 && dot(cross(foot, vb), n) >= 0.0;
  if (!inside) return endpoint;
  return std::min(endpoint, kEarthRadiusKm * std::asin(std::min(1.0, std::abs(s))));
}

GeoPoint spherical_centroid(std::span<const GeoPoint> points) {
  if (points.empty()) throw Error(Errc::EmptyInput, "centroid of no points");
  if (std::all_of(points.begin(), points.end(), [&](const GeoPoint& p) { return p.lat == points[0].lat && p.lon == points[0].lon; }))
    return points[0];
  Vec3 acc{0, 0, 0};
  for (const auto& p : points) {
    const Vec3 v = to_unit(p);
    acc.x += v.x;
    acc.y += v.y;
    acc.z += v.z;
  }
  if (norm(acc) < 1e-12) throw Error(Errc::InvalidArgument, "centroid undefined for balanced antipodes");
  return from_vec(acc);
}

LocalOffset local_offset(GeoPoint origin, GeoPoint p) noexcept {
  const double d = haversine_km(origin, p);
  if (d == 0.0) return {0.0, 0.0};
  const double p1 = origin.lat * kDegToRad;
  const double p2 = p.lat * kDegToRad;
  const double dl = (p.lon - origin.lon) * kDegToRad;
  const double y = std::sin(dl) * std::cos(p2);
  const double x = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  const double h = std::hypot(x, y);
  if (h == 0.0) return {0.0, 0.0};
  return {d * y / h, d * x / h};
}

}  // namespace tcv
