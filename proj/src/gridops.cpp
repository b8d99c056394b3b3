#include "tcv/gridops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tcv/error.hpp"
#include "tcv/kernels.hpp"

namespace tcv {

namespace {

constexpr double kEarthRadiusM = kEarthRadiusKm * 1000.0;
constexpr double kPoleMaskLat = 89.0;

void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (!(a.spec == b.spec) || a.values.size() != b.values.size())
    throw Error(Errc::SpecMismatch, std::string(what) + ": grids differ");
}

double sin2_half(double deg) {
  const double s = std::sin(0.5 * deg * kDegToRad);
  return s * s;
}

bool more_extreme(double a, double b, ExtremeMode mode) { return mode == ExtremeMode::Min ? a < b : a > b; }

}  // namespace

void for_each_in_radius(const GridSpec& spec, GeoPoint center, double radius_km,
                        const std::function<void(std::size_t, std::size_t, double)>& fn) {
  if (!(radius_km > 0.0)) throw Error(Errc::InvalidArgument, "radius must be positive");
  const double r_deg = radius_km / (kEarthRadiusKm * kDegToRad);
  const double lo = center.lat - r_deg;
  const double hi = center.lat + r_deg;
  if (hi < spec.lat_min() || lo > spec.lat_max()) return;

  std::vector<double> col_terms(spec.nlon);
  for (std::size_t i = 0; i < spec.nlon; ++i) col_terms[i] = sin2_half(spec.lon(i) - center.lon);

  const double half_angle = 0.5 * radius_km / kEarthRadiusKm;
  const double h_max = half_angle >= 0.5 * kPi ? 1.0 : std::pow(std::sin(half_angle), 2);
  const double cos_c = std::cos(center.lat * kDegToRad);
  const auto& k = kernels::active();
  std::vector<double> h(spec.nlon);

  for (std::size_t j = 0; j < spec.nlat; ++j) {
    const double la = spec.lat(j);
    if (la < lo - 1e-9 || la > hi + 1e-9) continue;
    k.haversine_row(sin2_half(la - center.lat), cos_c * std::cos(la * kDegToRad), col_terms, h);
    for (std::size_t i = 0; i < spec.nlon; ++i) {
      if (h[i] > h_max * (1.0 + 1e-12) + 1e-300) continue;
      const double d = 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h[i])));
      if (d <= radius_km) fn(j, i, d);
    }
  }
}

Field relative_vorticity(const Field& u, const Field& v) {
  require_same_grid(u, v, "relative_vorticity");
  if (u.level != v.level || u.valid_time != v.valid_time)
    throw Error(Errc::SpecMismatch, "relative_vorticity: u and v differ in level or time");
  const GridSpec& g = u.spec;
  Field out(g, Variable::Vorticity, u.level, u.valid_time, 0.0);
  out.missing.assign(g.size(), 0);

  const std::size_t nlat = g.nlat;
  const std::size_t nlon = g.nlon;
  const double dy = kEarthRadiusM * g.dlat * kDegToRad;  // signed with storage direction
  const double dlon_rad = g.dlon * kDegToRad;
  const auto& k = kernels::active();

  for (std::size_t j = 0; j < nlat; ++j) {
    auto orow = out.row(j);
    const double la = g.lat(j);
    if (std::abs(la) > kPoleMaskLat) {
      std::fill(orow.begin(), orow.end(), std::numeric_limits<double>::quiet_NaN());
      std::fill(out.missing.begin() + static_cast<std::ptrdiff_t>(j * nlon),
                out.missing.begin() + static_cast<std::ptrdiff_t>((j + 1) * nlon), 1);
      continue;
    }
    const double dx = kEarthRadiusM * std::cos(la * kDegToRad) * dlon_rad;
    std::size_t jn = j, js = j;
    double inv_y;
    if (j > 0 && j + 1 < nlat) {
      jn = j + 1;
      js = j - 1;
      inv_y = 1.0 / (2.0 * dy);
    } else if (j == 0) {
      jn = 1;
      inv_y = 1.0 / dy;
    } else {
      js = j - 1;
      inv_y = 1.0 / dy;
    }
    auto vrow = v.row(j);
    auto un = u.row(jn);
    auto us = u.row(js);
    const double inv_2dx = 1.0 / (2.0 * dx);
    k.vorticity_row(vrow, un, us, inv_2dx, inv_y, orow);

    // Longitude edges.
    const double du0 = (un[0] - us[0]) * inv_y;
    const double dun = (un[nlon - 1] - us[nlon - 1]) * inv_y;
    if (g.wraps_lon) {
      orow[0] = (vrow[1] - vrow[nlon - 1]) * inv_2dx - du0;
      orow[nlon - 1] = (vrow[0] - vrow[nlon - 2]) * inv_2dx - dun;
    } else {
      orow[0] = (vrow[1] - vrow[0]) / dx - du0;
      orow[nlon - 1] = (vrow[nlon - 1] - vrow[nlon - 2]) / dx - dun;
    }
  }

  if (u.has_mask() || v.has_mask()) {
    auto miss = [&](std::size_t jj, std::size_t ii) {
      const std::size_t idx = g.index(jj, ii);
      return u.is_missing(idx) || v.is_missing(idx);
    };
    for (std::size_t j = 0; j < nlat; ++j) {
      const std::size_t jn = std::min(j + 1, nlat - 1);
      const std::size_t js = j == 0 ? 0 : j - 1;
      for (std::size_t i = 0; i < nlon; ++i) {
        const std::size_t ie = i + 1 < nlon ? i + 1 : (g.wraps_lon ? 0 : i);
        const std::size_t iw = i > 0 ? i - 1 : (g.wraps_lon ? nlon - 1 : i);
        if (miss(j, i) || miss(jn, i) || miss(js, i) || miss(j, ie) || miss(j, iw)) {
          out.missing[g.index(j, i)] = 1;
          out.values[g.index(j, i)] = std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
  }
  return out;
}

Field downsample(const Field& f, int factor) {
  if (factor < 2) throw Error(Errc::IncompatibleFactor, "factor must be >= 2, got " + std::to_string(factor));
  const GridSpec& g = f.spec;
  const auto fac = static_cast<std::size_t>(factor);
  if ((g.nlat - 1) % fac != 0)
    throw Error(Errc::IncompatibleFactor,
                "nlat-1 = " + std::to_string(g.nlat - 1) + " not divisible by " + std::to_string(factor));
  const bool lon_ok = g.wraps_lon ? g.nlon % fac == 0 : (g.nlon - 1) % fac == 0;
  if (!lon_ok)
    throw Error(Errc::IncompatibleFactor,
                "nlon = " + std::to_string(g.nlon) + " not compatible with factor " + std::to_string(factor));
  GridSpec c = g;
  c.dlat = g.dlat * factor;
  c.dlon = g.dlon * factor;
  c.nlat = (g.nlat - 1) / fac + 1;
  c.nlon = g.wraps_lon ? g.nlon / fac : (g.nlon - 1) / fac + 1;
  if (c.nlat < 2 || c.nlon < 2) throw Error(Errc::IncompatibleFactor, "coarse grid would be degenerate");

  Field out(c, f.variable, f.level, f.valid_time);
  if (f.has_mask()) out.missing.assign(c.size(), 0);
  for (std::size_t j = 0; j < c.nlat; ++j)
    for (std::size_t i = 0; i < c.nlon; ++i) {
      const std::size_t src = g.index(j * fac, i * fac);
      out.values[c.index(j, i)] = f.values[src];
      if (f.has_mask()) out.missing[c.index(j, i)] = f.missing[src];
    }
  return out;
}

Field upsample(const Field& f, const GridSpec& target) {
  target.validate();
  const GridSpec& g = f.spec;
  struct Axis {
    std::size_t i0, i1;
    double w;
  };
  std::vector<Axis> rows(target.nlat), cols(target.nlon);
  for (std::size_t j = 0; j < target.nlat; ++j) {
    auto fr = g.frac_row(target.lat(j));
    if (!fr) throw Error(Errc::DomainMismatch, "target latitude " + std::to_string(target.lat(j)) + " outside source");
    auto j0 = static_cast<std::size_t>(std::floor(*fr));
    if (j0 >= g.nlat - 1) j0 = g.nlat - 2;
    rows[j] = {j0, j0 + 1, *fr - static_cast<double>(j0)};
  }
  for (std::size_t i = 0; i < target.nlon; ++i) {
    auto fc = g.frac_col(target.lon(i));
    if (!fc) throw Error(Errc::DomainMismatch, "target longitude " + std::to_string(target.lon(i)) + " outside source");
    auto i0 = static_cast<std::size_t>(std::floor(*fc));
    if (g.wraps_lon) {
      i0 %= g.nlon;
      cols[i] = {i0, (i0 + 1) % g.nlon, *fc - std::floor(*fc)};
    } else {
      if (i0 >= g.nlon - 1) i0 = g.nlon - 2;
      cols[i] = {i0, i0 + 1, *fc - static_cast<double>(i0)};
    }
  }

  Field out(target, f.variable, f.level, f.valid_time);
  if (f.has_mask()) out.missing.assign(target.size(), 0);
  for (std::size_t j = 0; j < target.nlat; ++j) {
    const Axis& r = rows[j];
    for (std::size_t i = 0; i < target.nlon; ++i) {
      const Axis& c = cols[i];
      const double w00 = (1 - r.w) * (1 - c.w), w01 = (1 - r.w) * c.w;
      const double w10 = r.w * (1 - c.w), w11 = r.w * c.w;
      const std::size_t k00 = g.index(r.i0, c.i0), k01 = g.index(r.i0, c.i1);
      const std::size_t k10 = g.index(r.i1, c.i0), k11 = g.index(r.i1, c.i1);
      if (f.has_mask()) {
        auto bad = [&](std::size_t k, double w) { return w > 0.0 && f.missing[k]; };
        if (bad(k00, w00) || bad(k01, w01) || bad(k10, w10) || bad(k11, w11)) {
          out.missing[target.index(j, i)] = 1;
          out.values[target.index(j, i)] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
      }
      auto val = [&](std::size_t k, double w) { return w > 0.0 ? w * f.values[k] : 0.0; };
      out.values[target.index(j, i)] = val(k00, w00) + val(k01, w01) + val(k10, w10) + val(k11, w11);
    }
  }
  return out;
}

GridHit neighborhood_extreme(const Field& f, GeoPoint center, double radius_km, ExtremeMode mode) {
  bool found = false;
  GridHit best;
  for_each_in_radius(f.spec, center, radius_km, [&](std::size_t j, std::size_t i, double d) {
    const std::size_t k = f.spec.index(j, i);
    if (f.is_missing(k)) return;
    const double v = f.values[k];
    bool take = !found || more_extreme(v, best.value, mode);
    if (!take && v == best.value) {
      take = d < best.distance_km || (d == best.distance_km && std::pair{j, i} < std::pair{best.j, best.i});
    }
    if (take) {
      best = {v, f.spec.point(j, i), j, i, d};
      found = true;
    }
  });
  if (!found)
    throw Error(Errc::EmptyNeighborhood, "no grid points within " + std::to_string(radius_km) + " km of (" +
                                             std::to_string(center.lat) + ", " + std::to_string(center.lon) + ")");
  return best;
}

std::vector<GridHit> local_extrema(const Field& f, GeoPoint center, double radius_km, ExtremeMode mode) {
  const GridSpec& g = f.spec;
  std::vector<GridHit> hits;
  for_each_in_radius(g, center, radius_km, [&](std::size_t j, std::size_t i, double d) {
    if (j == 0 || j + 1 >= g.nlat) return;
    if (!g.wraps_lon && (i == 0 || i + 1 >= g.nlon)) return;
    const std::size_t k = g.index(j, i);
    if (f.is_missing(k)) return;
    const double v = f.values[k];
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (dj == 0 && di == 0) continue;
        const std::size_t jj = j + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(dj));
        const std::size_t ii = (i + g.nlon + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(di))) % g.nlon;
        const std::size_t kk = g.index(jj, ii);
        if (f.is_missing(kk) || !more_extreme(v, f.values[kk], mode)) return;
      }
    hits.push_back({v, g.point(j, i), j, i, d});
  });
  std::sort(hits.begin(), hits.end(), [](const GridHit& a, const GridHit& b) {
    if (a.distance_km != b.distance_km) return a.distance_km < b.distance_km;
    return std::pair{a.j, a.i} < std::pair{b.j, b.i};
  });
  return hits;
}

Field wind_speed(const Field& u, const Field& v) {
  require_same_grid(u, v, "wind_speed");
  Field out(u.spec, Variable::WindSpeed, u.level, u.valid_time);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = std::hypot(u.values[k], v.values[k]);
  if (u.has_mask() || v.has_mask()) {
    out.missing.assign(out.values.size(), 0);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.missing[k] = u.is_missing(k) || v.is_missing(k);
  }
  return out;
}

Field difference(const Field& a, const Field& b, Variable result_var) {
  require_same_grid(a, b, "difference");
  Field out(a.spec, result_var, a.level, a.valid_time);
  kernels::active().subtract(a.values, b.values, out.values);
  if (a.has_mask() || b.has_mask()) {
    out.missing.assign(out.values.size(), 0);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.missing[k] = a.is_missing(k) || b.is_missing(k);
  }
  return out;
}

}  // namespace tcv
