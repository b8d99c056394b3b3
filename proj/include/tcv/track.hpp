#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcv/geo.hpp"
#include "tcv/time.hpp"

namespace tcv {

enum class Phase { Tropical, Extratropical };

std::string_view to_string(Phase p) noexcept;
Phase parse_phase(std::string_view text);

struct TrackPoint {
  Timestamp valid_time{};
  GeoPoint center;
  double min_msl = 101000.0;  // Pa
  double max_ws10m = 0.0;     // m/s
  Phase phase = Phase::Tropical;
};

inline constexpr int kMeanMember = -1;
inline constexpr int kObsMember = -2;

std::string member_label(int member_id);
int parse_member_label(std::string_view text);

struct Track {
  std::string storm_id;
  int member_id = 0;
  std::vector<TrackPoint> points;

  /// Strictly increasing times with a uniform `step` between consecutive
  /// points; intensities inside their physical ranges. Throws InvalidArgument.
  void validate(Seconds step = kSixHours) const;

  const TrackPoint* at_time(Timestamp t) const noexcept;
  bool empty() const noexcept { return points.empty(); }
  Timestamp start() const { return points.front().valid_time; }
};

/// Member tracks of one storm from one initialization, plus their per-time
/// spherical centroid.
struct EnsembleTrackSet {
  std::string storm_id;
  Timestamp init_time{};
  std::vector<Track> members;
  Track mean_track;
};

/// At every time any member reaches, the centroid of the members alive then.
/// Intensities are plain member means; phase follows the first live member.
Track ensemble_mean_track(std::span<const Track> members, const std::string& storm_id);

EnsembleTrackSet make_ensemble(std::string storm_id, Timestamp init, std::vector<Track> members);

/// Track CSV, header
/// `storm_id,member_id,valid_time,lat,lon,min_msl_pa,max_ws10m_ms,phase`.
std::string tracks_to_csv(std::span<const Track> tracks);
/// Rows are grouped by (storm_id, member_id) in first-appearance order and
/// sorted by time within each group.
std::vector<Track> tracks_from_csv(std::string_view text);

}  // namespace tcv
