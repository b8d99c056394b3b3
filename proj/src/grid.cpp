#include "tcv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcv/error.hpp"

namespace tcv {

void GridSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(Errc::InvalidArgument, "grid: " + m); };
  if (nlat < 2 || nlon < 2) fail("need nlat >= 2 and nlon >= 2");
  if (!std::isfinite(lat0) || !std::isfinite(lon0) || !std::isfinite(dlat) || !std::isfinite(dlon))
    fail("non-finite geometry");
  if (dlat == 0.0) fail("dlat must be non-zero");
  if (dlon <= 0.0) fail("dlon must be positive");
  if (std::abs(dlat) * static_cast<double>(nlat - 1) > 180.0 + 1e-9) fail("latitude extent exceeds 180");
  if (lat_min() < -90.0 - 1e-9 || lat_max() > 90.0 + 1e-9) fail("latitudes outside [-90, 90]");
  const double lon_extent = dlon * static_cast<double>(nlon);
  if (wraps_lon && std::abs(lon_extent - 360.0) > 1e-6) fail("wrapping grid must span exactly 360 degrees");
  if (!wraps_lon && dlon * static_cast<double>(nlon - 1) >= 360.0) fail("longitude extent reaches 360");
}

double GridSpec::lat_min() const noexcept { return std::min(lat0, lat(nlat - 1)); }
double GridSpec::lat_max() const noexcept { return std::max(lat0, lat(nlat - 1)); }

std::optional<double> GridSpec::frac_row(double la) const noexcept {
  const double f = (la - lat0) / dlat;
  const double tol = 1e-9;
  if (f < -tol || f > static_cast<double>(nlat - 1) + tol) return std::nullopt;
  return std::clamp(f, 0.0, static_cast<double>(nlat - 1));
}

std::optional<double> GridSpec::frac_col(double lo) const noexcept {
  double off = std::fmod(lo - lon0, 360.0);
  if (off < 0) off += 360.0;
  const double f = off / dlon;
  const double n = static_cast<double>(nlon);
  if (wraps_lon) return f >= n ? f - n : f;
  const double tol = 1e-9;
  if (f <= static_cast<double>(nlon - 1) + tol) return std::min(f, n - 1.0);
  // Just west of lon0 lands near 360 after the fmod.
  if (f > (360.0 / dlon) - tol) return 0.0;
  return std::nullopt;
}

std::optional<std::pair<std::size_t, std::size_t>> GridSpec::nearest(GeoPoint p) const noexcept {
  auto fr = frac_row(p.lat);
  auto fc = frac_col(p.lon);
  if (!fr || !fc) return std::nullopt;
  auto j = static_cast<std::size_t>(std::lround(*fr));
  auto i = static_cast<std::size_t>(std::lround(*fc));
  if (i >= nlon) i = wraps_lon ? 0 : nlon - 1;
  return std::pair{std::min(j, nlat - 1), i};
}

double GridSpec::row_spacing_km() const noexcept { return std::abs(dlat) * kDegToRad * kEarthRadiusKm; }

bool GridSpec::operator==(const GridSpec& o) const noexcept {
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); };
  return nlat == o.nlat && nlon == o.nlon && wraps_lon == o.wraps_lon && close(lat0, o.lat0) &&
         close(normalize_lon(lon0), normalize_lon(o.lon0)) && close(dlat, o.dlat) && close(dlon, o.dlon);
}

namespace {
struct VarName {
  Variable v;
  std::string_view name;
};
constexpr VarName kVarNames[] = {
    {Variable::Msl, "msl"},        {Variable::T, "t"},          {Variable::U, "u"},
    {Variable::V, "v"},            {Variable::Z, "z"},          {Variable::Q, "q"},
    {Variable::Vorticity, "vo"},   {Variable::LandMask, "lsm"}, {Variable::WindSpeed, "ws"},
    {Variable::Mte, "mte"},        {Variable::Strike, "strike"}, {Variable::Other, "other"},
};
}  // namespace

std::string_view to_string(Variable v) noexcept {
  for (const auto& e : kVarNames)
    if (e.v == v) return e.name;
  return "other";
}

Variable parse_variable(std::string_view text) {
  for (const auto& e : kVarNames)
    if (e.name == text) return e.v;
  throw Error(Errc::Parse, "unknown variable '" + std::string(text) + "'");
}

std::string to_string(Level l) { return l.hpa == 0 ? std::string("surface") : std::to_string(l.hpa); }

Level parse_level(std::string_view text) {
  if (text == "surface" || text == "sfc") return Level::surface();
  std::string s(text);
  if (s.size() > 3 && s.substr(s.size() - 3) == "hPa") s.resize(s.size() - 3);
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size() || v <= 0) throw std::invalid_argument("level");
    return Level{v};
  } catch (const std::exception&) {
    throw Error(Errc::Parse, "unknown level '" + std::string(text) + "'");
  }
}

Field::Field(GridSpec s, Variable var, Level lev, Timestamp t, double fill)
    : spec(s), values(s.size(), fill), variable(var), level(lev), valid_time(t) {}

void Field::validate() const {
  spec.validate();
  if (values.size() != spec.size())
    throw Error(Errc::InvalidArgument, "field value count does not match grid");
  if (!missing.empty() && missing.size() != values.size())
    throw Error(Errc::InvalidArgument, "missing mask size does not match grid");
  for (std::size_t k = 0; k < values.size(); ++k)
    if (!std::isfinite(values[k]) && !is_missing(k))
      throw Error(Errc::InvalidArgument, "non-finite value without missing mask at index " + std::to_string(k));
}

void FieldSet::insert(Field f) {
  FieldKey key{f.variable, f.level};
  fields_.insert_or_assign(key, std::move(f));
}

const Field* FieldSet::find(Variable v, Level l) const noexcept {
  auto it = fields_.find(FieldKey{v, l});
  return it == fields_.end() ? nullptr : &it->second;
}

const Field& FieldSet::at(Variable v, Level l) const {
  if (const Field* f = find(v, l)) return *f;
  throw Error(Errc::MissingField,
              std::string(to_string(v)) + " at " + to_string(l) + " (" + format_time(valid_time_) + ")");
}

}  // namespace tcv
