#include "tcv/synth.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "tcv/error.hpp"

namespace tcv {

void VortexSpec::validate() const {
  if (!(center.lat >= -90.0 && center.lat <= 90.0) || !std::isfinite(center.lon))
    throw Error(Errc::InvalidArgument, "vortex centre out of range");
  if (!(central_pressure <= ambient_pressure) || !(central_pressure > 0))
    throw Error(Errc::InvalidArgument, "central pressure must be positive and <= ambient");
  if (!(radius_max_wind_km > 0)) throw Error(Errc::InvalidArgument, "radius of maximum wind must be > 0");
  if (!(peak_wind >= 0)) throw Error(Errc::InvalidArgument, "peak wind must be >= 0");
  if (!(shape_b > 0)) throw Error(Errc::InvalidArgument, "shape exponent must be > 0");
}

double VortexSpec::wind_at(double r_km) const {
  if (!active()) return 0.0;
  const double s = r_km / radius_max_wind_km;
  return peak_wind * s * std::exp((1.0 - std::pow(s, shape_b)) / shape_b);
}

double VortexSpec::pressure_at(double r_km) const {
  if (!active()) return ambient_pressure;
  const double s = r_km / radius_max_wind_km;
  const double x = 2.0 * std::pow(s, shape_b) / shape_b;
  return central_pressure + (ambient_pressure - central_pressure) * boost::math::gamma_p(2.0 / shape_b, x);
}

double VortexSpec::vorticity_at(double r_km) const {
  if (!active()) return 0.0;
  const double sb = std::pow(r_km / radius_max_wind_km, shape_b);
  return peak_wind / (radius_max_wind_km * 1000.0) * std::exp((1.0 - sb) / shape_b) * (2.0 - sb);
}

double VortexSpec::core_vorticity() const { return vorticity_at(0.0); }

void EnsembleNoiseSpec::validate() const {
  if (!(sigma_growth_km >= 0) || !(intensity_sigma_pa >= 0))
    throw Error(Errc::InvalidArgument, "noise sigmas must be >= 0");
}

FieldSet gen_vortex_field(const VortexSpec& v, const GridSpec& grid, Timestamp t, const FieldOptions& opt) {
  v.validate();
  grid.validate();
  if (!grid.contains(v.center))
    throw Error(Errc::VortexOutsideDomain, "vortex at (" + std::to_string(v.center.lat) + ", " +
                                               std::to_string(v.center.lon) + ") is outside the grid");
  const Level sfc = Level::surface(), l850{850}, l500{500}, l200{200};
  Field msl(grid, Variable::Msl, sfc, t), u10(grid, Variable::U, sfc, t), v10(grid, Variable::V, sfc, t);
  Field u850(grid, Variable::U, l850, t), v850(grid, Variable::V, l850, t);
  Field u500(grid, Variable::U, l500, t, opt.steering.u), v500(grid, Variable::V, l500, t, opt.steering.v);
  Field z850(grid, Variable::Z, l850, t), z200(grid, Variable::Z, l200, t);
  Field t850(grid, Variable::T, l850, t), q850(grid, Variable::Q, l850, t);

  const double hemi = v.center.lat >= 0.0 ? 1.0 : -1.0;
  const double amp = (v.ambient_pressure - v.central_pressure) / 5000.0;
  const double core_km = 4.0 * v.radius_max_wind_km;
  for (std::size_t j = 0; j < grid.nlat; ++j) {
    for (std::size_t i = 0; i < grid.nlon; ++i) {
      const std::size_t k = grid.index(j, i);
      const LocalOffset off = local_offset(v.center, grid.point(j, i));
      const double r = std::hypot(off.east_km, off.north_km);
      double uv = 0.0, vv = 0.0;
      if (r > 0.0) {
        const double w = v.wind_at(r);
        uv = -hemi * w * off.north_km / r;
        vv = hemi * w * off.east_km / r;
      }
      msl.values[k] = v.pressure_at(r);
      u10.values[k] = uv + opt.steering.u;
      v10.values[k] = vv + opt.steering.v;
      u850.values[k] = uv + opt.steering.u;
      v850.values[k] = vv + opt.steering.v;
      const double g = amp * std::exp(-(r / core_km) * (r / core_km));
      z850.values[k] = 1500.0 - 30.0 * g;
      z200.values[k] = 12000.0 + 30.0 * g;
      t850.values[k] = 288.0 + 3.0 * g;
      q850.values[k] = 0.012 + 0.003 * g;
    }
  }
  FieldSet fs(t);
  fs.insert(std::move(msl));
  fs.insert(std::move(u10));
  fs.insert(std::move(v10));
  if (opt.upper_levels) {
    fs.insert(std::move(u850));
    fs.insert(std::move(v850));
    fs.insert(std::move(u500));
    fs.insert(std::move(v500));
    fs.insert(std::move(z850));
    fs.insert(std::move(z200));
    fs.insert(std::move(t850));
    fs.insert(std::move(q850));
  }
  return fs;
}

Field gen_land_mask(const GridSpec& grid, const std::optional<Region>& land) {
  Field m(grid, Variable::LandMask, Level::surface(), Timestamp{});
  if (!land) return m;
  for (std::size_t j = 0; j < grid.nlat; ++j)
    for (std::size_t i = 0; i < grid.nlon; ++i)
      if (land->contains(grid.point(j, i))) m.at(j, i) = 1.0;
  return m;
}

TruthRun advect_truth(const VortexSpec& v0, const Motion& motion, int steps, const GridSpec& grid, Timestamp init,
                      std::optional<int> dissipate_after, Seconds dt, const std::string& storm_id) {
  v0.validate();
  if (steps < 0) throw Error(Errc::InvalidArgument, "steps must be >= 0");
  if (!(motion.speed_ms >= 0)) throw Error(Errc::InvalidArgument, "motion speed must be >= 0");
  if (dissipate_after && *dissipate_after < 0) throw Error(Errc::InvalidArgument, "dissipate_after must be >= 0");
  const double dt_s = static_cast<double>(dt.count());

  TruthRun out;
  out.grid = grid;
  out.track.storm_id = storm_id;
  out.track.member_id = kObsMember;
  for (int n = 0; n <= steps; ++n) {
    const double dist = motion.speed_ms * dt_s * n / 1000.0;
    const GeoPoint pos = destination(v0.center, motion.bearing_deg, dist);
    const double bearing = dist > 1e-6 ? std::fmod(azimuth_deg(pos, v0.center) + 180.0, 360.0) : motion.bearing_deg;
    const Wind steer{motion.speed_ms * std::sin(bearing * kDegToRad), motion.speed_ms * std::cos(bearing * kDegToRad)};
    const bool alive = !dissipate_after || n <= *dissipate_after;

    VortexSpec v = v0;
    v.center = pos;
    if (!alive) v.central_pressure = v.ambient_pressure;
    if (alive && v.active() && !grid.contains(pos))
      throw Error(Errc::TrackExitsDomain, "step " + std::to_string(n) + " centre (" + std::to_string(pos.lat) + ", " +
                                              std::to_string(pos.lon) + ") leaves the grid");
    const Timestamp t = init + dt * n;
    VortexSpec placed = v;
    if (!grid.contains(placed.center)) placed.center = grid.point(0, 0);
    out.fields.push_back(gen_vortex_field(placed, grid, t, {steer, true}));
    out.vortices.push_back(v);
    out.steering.push_back(steer);
    if (alive && v.active())
      out.track.points.push_back({t, pos, v.central_pressure, v.peak_wind, Phase::Tropical});
  }
  return out;
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t replication) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

EnsembleTrackSet gen_ensemble(const Track& truth, const EnsembleNoiseSpec& noise, int members,
                              std::uint64_t replication) {
  noise.validate();
  if (members < 2) throw Error(Errc::TooFewMembers, "an ensemble needs >= 2 members");
  if (truth.empty()) throw Error(Errc::EmptyInput, "empty truth track");
  auto rng = stream(noise.seed, replication);
  std::normal_distribution<double> unit(0.0, 1.0);

  std::vector<Track> tracks;
  tracks.reserve(static_cast<std::size_t>(members));
  for (int m = 0; m < members; ++m) {
    Track t;
    t.storm_id = truth.storm_id;
    t.member_id = m;
    for (std::size_t n = 0; n < truth.points.size(); ++n) {
      TrackPoint p = truth.points[n];
      // Radial RMS sigma means sigma / sqrt(2) per tangent-plane axis.
      const double axis = noise.sigma_growth_km * static_cast<double>(n) / std::sqrt(2.0);
      const double east = axis * unit(rng);
      const double north = axis * unit(rng);
      const double dp = noise.intensity_sigma_pa * unit(rng);
      const double d = std::hypot(east, north);
      if (d > 0.0) p.center = destination(p.center, std::atan2(east, north) * kRadToDeg, d);
      p.min_msl += dp;
      t.points.push_back(p);
    }
    tracks.push_back(std::move(t));
  }
  return make_ensemble(truth.storm_id, truth.start(), std::move(tracks));
}

double expected_spread_km(double sigma_km, int members) {
  if (members < 2) throw Error(Errc::TooFewMembers, "expected spread needs >= 2 members");
  const double m = static_cast<double>(members);
  return sigma_km / std::sqrt(2.0) * std::sqrt(2.0 / m) * std::exp(std::lgamma(m - 0.5) - std::lgamma(m - 1.0));
}

std::vector<FieldSet> gen_member_run(const TruthRun& truth, const Track& member) {
  std::vector<FieldSet> run;
  run.reserve(truth.fields.size());
  for (std::size_t n = 0; n < truth.fields.size(); ++n) {
    const Timestamp t = truth.fields[n].valid_time();
    VortexSpec v = truth.vortices[n];
    const TrackPoint* p = member.at_time(t);
    if (p && v.active() && truth.grid.contains(p->center)) {
      v.center = p->center;
      v.central_pressure = std::min(p->min_msl, v.ambient_pressure - 1.0);
    } else {
      // Off the grid or past the end: no vortex for this member.
      v.central_pressure = v.ambient_pressure;
      v.center = truth.grid.point(0, 0);
    }
    run.push_back(gen_vortex_field(v, truth.grid, t, {truth.steering[n], true}));
  }
  return run;
}

std::vector<std::vector<FieldSet>> gen_member_runs(const TruthRun& truth, const EnsembleTrackSet& ens) {
  std::vector<std::vector<FieldSet>> runs;
  runs.reserve(ens.members.size());
  for (const auto& member : ens.members) runs.push_back(gen_member_run(truth, member));
  return runs;
}

// ---------------------------------------------------------------------------
// Scenario files.

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
T number(std::string_view key, std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || text.empty())
    throw Error(Errc::Parse, "scenario key '" + std::string(key) + "': bad number '" + std::string(text) + "'");
  return v;
}

bool boolean(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(Errc::Parse, "scenario key '" + std::string(key) + "': bad boolean '" + std::string(text) + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void Scenario::validate() const {
  grid.validate();
  vortex.validate();
  noise.validate();
  if (steps < 0) throw Error(Errc::InvalidArgument, "steps must be >= 0");
  if (members < 2) throw Error(Errc::TooFewMembers, "members must be >= 2");
  if (storm_id.empty()) throw Error(Errc::InvalidArgument, "storm_id must not be empty");
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::Parse, "scenario line " + std::to_string(line_no) + ": expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view val = trim(line.substr(eq + 1));
    if (key == "grid") {
      const auto p = split(val, ',');
      if (p.size() != 6 && p.size() != 7) throw Error(Errc::Parse, "grid = lat0,lon0,dlat,dlon,nlat,nlon[,wrap]");
      s.grid = {number<double>(key, p[0]), number<double>(key, p[1]), number<double>(key, p[2]),
                number<double>(key, p[3]), number<std::size_t>(key, p[4]), number<std::size_t>(key, p[5]),
                p.size() == 7 && boolean(key, p[6])};
    } else if (key == "vortex.lat") {
      s.vortex.center.lat = number<double>(key, val);
    } else if (key == "vortex.lon") {
      s.vortex.center.lon = number<double>(key, val);
    } else if (key == "vortex.central_pressure") {
      s.vortex.central_pressure = number<double>(key, val);
    } else if (key == "vortex.ambient_pressure") {
      s.vortex.ambient_pressure = number<double>(key, val);
    } else if (key == "vortex.rmw_km") {
      s.vortex.radius_max_wind_km = number<double>(key, val);
    } else if (key == "vortex.peak_wind") {
      s.vortex.peak_wind = number<double>(key, val);
    } else if (key == "vortex.b") {
      s.vortex.shape_b = number<double>(key, val);
    } else if (key == "motion.bearing") {
      s.motion.bearing_deg = number<double>(key, val);
    } else if (key == "motion.speed") {
      s.motion.speed_ms = number<double>(key, val);
    } else if (key == "steps") {
      s.steps = number<int>(key, val);
    } else if (key == "dissipate_after") {
      s.dissipate_after = number<int>(key, val);
    } else if (key == "noise.sigma_growth_km") {
      s.noise.sigma_growth_km = number<double>(key, val);
    } else if (key == "noise.intensity_sigma_pa") {
      s.noise.intensity_sigma_pa = number<double>(key, val);
    } else if (key == "seed") {
      s.noise.seed = number<std::uint64_t>(key, val);
    } else if (key == "members") {
      s.members = number<int>(key, val);
    } else if (key == "storm_id") {
      s.storm_id = std::string(val);
    } else if (key == "init_time") {
      s.init_time = parse_time(val);
    } else if (key == "member_fields") {
      s.member_fields = boolean(key, val);
    } else if (key == "land") {
      const auto p = split(val, ',');
      if (p.size() != 4) throw Error(Errc::Parse, "land = lat_min,lat_max,lon_min,lon_max");
      s.land = Region{number<double>(key, p[0]), number<double>(key, p[1]), number<double>(key, p[2]),
                      number<double>(key, p[3])};
    } else {
      throw Error(Errc::Parse, "scenario line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  }
  s.validate();
  return s;
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream o;
  o << "grid = " << fmt(s.grid.lat0) << ',' << fmt(s.grid.lon0) << ',' << fmt(s.grid.dlat) << ',' << fmt(s.grid.dlon)
    << ',' << s.grid.nlat << ',' << s.grid.nlon << ',' << (s.grid.wraps_lon ? "true" : "false") << '\n';
  o << "vortex.lat = " << fmt(s.vortex.center.lat) << '\n';
  o << "vortex.lon = " << fmt(s.vortex.center.lon) << '\n';
  o << "vortex.central_pressure = " << fmt(s.vortex.central_pressure) << '\n';
  o << "vortex.ambient_pressure = " << fmt(s.vortex.ambient_pressure) << '\n';
  o << "vortex.rmw_km = " << fmt(s.vortex.radius_max_wind_km) << '\n';
  o << "vortex.peak_wind = " << fmt(s.vortex.peak_wind) << '\n';
  o << "vortex.b = " << fmt(s.vortex.shape_b) << '\n';
  o << "motion.bearing = " << fmt(s.motion.bearing_deg) << '\n';
  o << "motion.speed = " << fmt(s.motion.speed_ms) << '\n';
  o << "steps = " << s.steps << '\n';
  if (s.dissipate_after) o << "dissipate_after = " << *s.dissipate_after << '\n';
  o << "noise.sigma_growth_km = " << fmt(s.noise.sigma_growth_km) << '\n';
  o << "noise.intensity_sigma_pa = " << fmt(s.noise.intensity_sigma_pa) << '\n';
  o << "seed = " << s.noise.seed << '\n';
  o << "members = " << s.members << '\n';
  o << "storm_id = " << s.storm_id << '\n';
  o << "init_time = " << format_time(s.init_time) << '\n';
  o << "member_fields = " << (s.member_fields ? "true" : "false") << '\n';
  if (s.land)
    o << "land = " << fmt(s.land->lat_min) << ',' << fmt(s.land->lat_max) << ',' << fmt(s.land->lon_min) << ','
      << fmt(s.land->lon_max) << '\n';
  return o.str();
}

}  // namespace tcv
