#pragma once

// Synthetic vortices, prescribed tracks and noisy ensembles with known
// answers. The wind profile is cyclostrophic (no Coriolis term), which is
// enough for tracker fixtures but is not a physical balance.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcv/energy.hpp"
#include "tcv/grid.hpp"
#include "tcv/track.hpp"
#include "tcv/tracker.hpp"

namespace tcv {

/// Axisymmetric vortex. With s = r / rmw:
///   V(s)    = peak_wind * s * exp((1 - s^b) / b)
///   MSL(s)  = central + (ambient - central) * P(2/b, 2 s^b / b)
///   zeta(s) = (peak_wind / rmw) * exp((1 - s^b) / b) * (2 - s^b)
/// where P is the regularized lower incomplete gamma function. The pressure
/// shape is the cyclostrophic integral of V. zeta peaks at the centre at
/// 2 e^(1/b) peak_wind / rmw. A vortex with central == ambient is inactive:
/// flat pressure and no vortex winds.
struct VortexSpec {
  GeoPoint center;
  double central_pressure = 96000.0;  // Pa
  double ambient_pressure = 101000.0; // Pa
  double radius_max_wind_km = 50.0;
  double peak_wind = 40.0;            // m/s
  double shape_b = 1.0;

  /// Throws InvalidArgument.
  void validate() const;
  bool active() const noexcept { return central_pressure < ambient_pressure; }

  double wind_at(double r_km) const;
  double pressure_at(double r_km) const;
  double vorticity_at(double r_km) const;
  double core_vorticity() const;
};

struct EnsembleNoiseSpec {
  double sigma_growth_km = 0.0;  // radial RMS offset added per 6 h step
  double intensity_sigma_pa = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FieldOptions {
  Wind steering;               // uniform flow added at 850 and 500 hPa and the surface
  bool upper_levels = true;    // 850/500 winds, Z850/Z200, T/q at 850
};

/// Fields: MSL, u/v at the surface and 850 hPa (vortex + steering), u/v at
/// 500 hPa (steering only), Z at 850/200 hPa with a warm-core thickness
/// maximum, T and q at 850 hPa with a warm moist core. Winds turn
/// counter-clockwise in the northern hemisphere and clockwise in the southern.
/// Throws VortexOutsideDomain.
FieldSet gen_vortex_field(const VortexSpec& v, const GridSpec& grid, Timestamp t = {}, const FieldOptions& opt = {});

/// Grid of 0 (ocean) with 1 inside the lat/lon box.
Field gen_land_mask(const GridSpec& grid, const std::optional<Region>& land = std::nullopt);

struct Motion {
  double bearing_deg = 270.0;
  double speed_ms = 0.0;
};

struct TruthRun {
  GridSpec grid;
  std::vector<FieldSet> fields;      // steps + 1 times
  std::vector<VortexSpec> vortices;  // per time, inactive after dissipation
  std::vector<Wind> steering;        // per time
  Track track;                       // times with an active vortex
};

/// Moves the vortex along the great circle from v0.center at constant speed.
/// The steering flow at each time equals the motion vector at the current
/// centre. With dissipate_after = k, times after step k carry no vortex.
/// Throws TrackExitsDomain.
TruthRun advect_truth(const VortexSpec& v0, const Motion& motion, int steps, const GridSpec& grid, Timestamp init,
                      std::optional<int> dissipate_after = std::nullopt, Seconds dt = kSixHours,
                      const std::string& storm_id = "SYN01");

/// Members are the truth displaced by isotropic Gaussian offsets in the local
/// tangent plane with radial RMS sigma_growth_km * step. `replication`
/// selects an independent stream derived from (seed, replication).
EnsembleTrackSet gen_ensemble(const Track& truth, const EnsembleNoiseSpec& noise, int members,
                              std::uint64_t replication = 0);

/// Mean of the per-case member spread for M members with radial RMS offset
/// sigma: (sigma/sqrt 2) * sqrt(2/M) * Gamma(M - 1/2) / Gamma(M - 1).
double expected_spread_km(double sigma_km, int members);

/// Field run for one member track.
std::vector<FieldSet> gen_member_run(const TruthRun& truth, const Track& member);

/// Per-member field runs with the vortex at each member position. Member
/// times past the end of a member track carry no vortex.
std::vector<std::vector<FieldSet>> gen_member_runs(const TruthRun& truth, const EnsembleTrackSet& ens);

/// Scenario file: `key = value` lines, `#` comments.
struct Scenario {
  GridSpec grid{10.0, 120.0, 0.25, 0.25, 161, 241, false};
  VortexSpec vortex{{20.0, 150.0}};
  Motion motion{270.0, 5.0};
  int steps = 20;
  std::optional<int> dissipate_after;
  EnsembleNoiseSpec noise{25.0, 0.0, 1};
  int members = 10;
  std::string storm_id = "SYN01";
  Timestamp init_time = parse_time("2024-09-01T00:00:00Z");
  bool member_fields = true;
  std::optional<Region> land;

  void validate() const;
};

/// Throws Parse on unknown keys or malformed values.
Scenario parse_scenario(std::string_view text);
std::string format_scenario(const Scenario& s);

}  // namespace tcv
