#include "tcv/track.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "tcv/error.hpp"

namespace tcv {

std::string_view to_string(Phase p) noexcept { return p == Phase::Tropical ? "tropical" : "extratropical"; }

Phase parse_phase(std::string_view text) {
  if (text == "tropical" || text.empty()) return Phase::Tropical;
  if (text == "extratropical") return Phase::Extratropical;
  throw Error(Errc::Parse, "unknown phase '" + std::string(text) + "'");
}

std::string member_label(int member_id) {
  if (member_id == kMeanMember) return "MEAN";
  if (member_id == kObsMember) return "OBS";
  return std::to_string(member_id);
}

int parse_member_label(std::string_view text) {
  if (text == "MEAN") return kMeanMember;
  if (text == "OBS") return kObsMember;
  try {
    std::size_t pos = 0;
    int v = std::stoi(std::string(text), &pos);
    if (pos != text.size() || v < 0) throw std::invalid_argument("member");
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::Parse, "bad member_id '" + std::string(text) + "'");
  }
}

void Track::validate(Seconds step) const {
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    if (!(p.min_msl > 85000.0 && p.min_msl < 108000.0))
      throw Error(Errc::InvalidArgument, "track " + storm_id + ": min_msl out of range at " + format_time(p.valid_time));
    if (!(p.max_ws10m >= 0.0))
      throw Error(Errc::InvalidArgument, "track " + storm_id + ": negative max wind at " + format_time(p.valid_time));
    if (k > 0 && p.valid_time - points[k - 1].valid_time != step)
      throw Error(Errc::TimeMisalignment, "track " + storm_id + " member " + member_label(member_id) +
                                              ": non-uniform step before " + format_time(p.valid_time));
  }
}

const TrackPoint* Track::at_time(Timestamp t) const noexcept {
  auto it = std::lower_bound(points.begin(), points.end(), t,
                             [](const TrackPoint& p, Timestamp v) { return p.valid_time < v; });
  return it != points.end() && it->valid_time == t ? &*it : nullptr;
}

Track ensemble_mean_track(std::span<const Track> members, const std::string& storm_id) {
  std::set<Timestamp> times;
  for (const auto& m : members)
    for (const auto& p : m.points) times.insert(p.valid_time);
  Track mean{storm_id, kMeanMember, {}};
  std::vector<GeoPoint> alive;
  for (Timestamp t : times) {
    alive.clear();
    double msl = 0.0, ws = 0.0;
    std::optional<Phase> phase;
    for (const auto& m : members) {
      if (const TrackPoint* p = m.at_time(t)) {
        alive.push_back(p->center);
        msl += p->min_msl;
        ws += p->max_ws10m;
        if (!phase) phase = p->phase;
      }
    }
    const double n = static_cast<double>(alive.size());
    mean.points.push_back({t, spherical_centroid(alive), msl / n, ws / n, phase.value_or(Phase::Tropical)});
  }
  return mean;
}

EnsembleTrackSet make_ensemble(std::string storm_id, Timestamp init, std::vector<Track> members) {
  if (members.empty()) throw Error(Errc::EmptyInput, "ensemble needs at least one member");
  EnsembleTrackSet set{std::move(storm_id), init, std::move(members), {}};
  set.mean_track = ensemble_mean_track(set.members, set.storm_id);
  return set;
}

std::string tracks_to_csv(std::span<const Track> tracks) {
  std::string out = "storm_id,member_id,valid_time,lat,lon,min_msl_pa,max_ws10m_ms,phase\n";
  char buf[256];
  for (const auto& t : tracks)
    for (const auto& p : t.points) {
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.2f,%.3f,", p.center.lat, p.center.lon, p.min_msl, p.max_ws10m);
      out += t.storm_id + "," + member_label(t.member_id) + "," + format_time(p.valid_time) + buf +
             std::string(to_string(p.phase)) + "\n";
    }
  return out;
}

namespace {
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("num");
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::Parse, "track csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}
}  // namespace

std::vector<Track> tracks_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::Parse, "track csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "storm_id,member_id,valid_time,lat,lon,min_msl_pa,max_ws10m_ms,phase")
    throw Error(Errc::Parse, "track csv: unexpected header '" + line + "'");
  std::vector<Track> tracks;
  std::map<std::pair<std::string, int>, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto c = split_csv(line);
    if (c.size() != 8) throw Error(Errc::Parse, "track csv line " + std::to_string(line_no) + ": expected 8 columns");
    const int member = parse_member_label(c[1]);
    auto key = std::pair{c[0], member};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, tracks.size()).first;
      tracks.push_back(Track{c[0], member, {}});
    }
    TrackPoint p;
    p.valid_time = parse_time(c[2]);
    p.center = GeoPoint::make(to_double(c[3], line_no), to_double(c[4], line_no));
    p.min_msl = to_double(c[5], line_no);
    p.max_ws10m = to_double(c[6], line_no);
    p.phase = parse_phase(c[7]);
    tracks[it->second].points.push_back(p);
  }
  for (auto& t : tracks) {
    std::stable_sort(t.points.begin(), t.points.end(),
                     [](const TrackPoint& a, const TrackPoint& b) { return a.valid_time < b.valid_time; });
    for (std::size_t k = 1; k < t.points.size(); ++k)
      if (t.points[k].valid_time == t.points[k - 1].valid_time)
        throw Error(Errc::Parse, "track csv: duplicate time " + format_time(t.points[k].valid_time) + " for " +
                                     t.storm_id + "/" + member_label(t.member_id));
  }
  return tracks;
}

}  // namespace tcv
