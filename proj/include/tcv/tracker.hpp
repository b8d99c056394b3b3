#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcv/error.hpp"
#include "tcv/grid.hpp"
#include "tcv/track.hpp"

namespace tcv {

struct SteeringLevel {
  Level level;
  double weight;
};

struct TrackerConfig {
  double search_radius_km = 445.0;
  double criteria_radius_km = 278.0;
  double wind10m_threshold = 8.0;  // m/s, strict '>' over land
  double vort_threshold = 5e-5;    // 1/s, '>=' on |zeta| at 850 hPa
  int coarsen_factor = 5;          // 1 disables coarsening
  double max_displacement_factor = 3.0;
  std::vector<SteeringLevel> steering{{Level{850}, 0.5}, {Level{500}, 0.5}};
  double steering_avg_radius_km = 278.0;
  bool require_thickness_max_when_extratropical = false;
  double step_seconds = 21600.0;
  double first_step_floor_km = 100.0;

  /// Throws InvalidArgument.
  void validate() const;
};

/// Mean steering wind (m/s) around center: per level, the plain mean of u and v
/// over grid points within steering_avg_radius_km, then the weighted sum.
struct Wind {
  double u = 0.0;
  double v = 0.0;
};
Wind steering_wind(GeoPoint center, const FieldSet& fields, const TrackerConfig& cfg);

/// Advection-only estimate of the next centre.
GeoPoint advect(GeoPoint center, Wind w, double seconds);

/// One history point: advection estimate. Two: the great-circle midpoint of
/// the linear extrapolation and the advection estimate. `fields` supplies the
/// steering winds at the time of history.back(). Throws
/// MissingSteeringFields.
GeoPoint first_guess(std::span<const TrackPoint> history, const FieldSet& fields, const TrackerConfig& cfg);

enum class CandidateSource { MslMinimum, VorticityMaximum };

struct Candidate {
  GeoPoint where;
  CandidateSource source;
  double distance_km;  // to the guess
};

/// Coarse-grid MSL minima and cyclonic 10 m vorticity maxima within the search
/// radius, each relocated to the full-resolution extreme inside its coarse
/// cell, de-duplicated at one coarse cell and sorted by distance to guess.
std::vector<Candidate> find_candidates(const FieldSet& fields, GeoPoint guess, const TrackerConfig& cfg);

enum class RejectReason { None, Vorticity, Wind, Thickness };
std::string_view to_string(RejectReason r) noexcept;

struct Validation {
  bool ok = false;
  RejectReason reason = RejectReason::None;
  double peak_abs_vorticity = 0.0;
  std::optional<double> peak_wind;  // set when the land criterion ran
};

/// Applies the 850 hPa vorticity, over-land 10 m wind, and (extratropical)
/// thickness criteria. `land_mask` may be null, which skips the wind test.
Validation validate_candidate(GeoPoint c, const FieldSet& fields, const Field* land_mask, Phase phase,
                              const TrackerConfig& cfg);

/// Caps the step from `from` to `proposed` at max_displacement_factor *
/// prev_disp_km, or at max(advection_km, first_step_floor_km) when there is no
/// previous displacement.
GeoPoint constrain_displacement(double prev_disp_km, GeoPoint proposed, GeoPoint from, const TrackerConfig& cfg,
                                double advection_km = 0.0);

using PhaseLookup = std::function<Phase(Timestamp)>;

/// Tracks one member from `seed` (at run.front()'s time) until no validated
/// candidate remains or the run ends. points[0] is the seed.
Track track_member(std::span<const FieldSet> run, const TrackPoint& seed, const TrackerConfig& cfg,
                   const Field* land_mask = nullptr, const PhaseLookup& phase = {});

struct MemberResult {
  int member_id = 0;
  std::optional<Track> track;
  std::string error;  // empty on success
  Errc error_code = Errc::InvalidArgument;
};

/// Runs track_member over every member run on up to `threads` workers (0 =
/// hardware concurrency). Failures are captured per member.
std::vector<MemberResult> track_members(std::span<const std::vector<FieldSet>> runs, std::span<const int> member_ids,
                                        const TrackPoint& seed, const TrackerConfig& cfg,
                                        const Field* land_mask = nullptr, const PhaseLookup& phase = {},
                                        unsigned threads = 1);

/// Like track_members but throws the first member failure (message tagged with
/// the member id) and returns the assembled ensemble.
EnsembleTrackSet track_ensemble(std::span<const std::vector<FieldSet>> runs, const std::string& storm_id,
                                const TrackPoint& seed, const TrackerConfig& cfg, const Field* land_mask = nullptr,
                                const PhaseLookup& phase = {}, unsigned threads = 1);

}  // namespace tcv
