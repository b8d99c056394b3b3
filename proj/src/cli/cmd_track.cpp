#include <set>
#include <sstream>

#include "common.hpp"
#include "tcv/error.hpp"
#include "tcv/io.hpp"

namespace tcv::cli {

namespace {

std::vector<FieldKey> required_fields(const TrackerConfig& tc) {
  std::set<FieldKey> req{{Variable::Msl, Level::surface()}, {Variable::U, Level::surface()},
                         {Variable::V, Level::surface()},   {Variable::U, Level{850}},
                         {Variable::V, Level{850}}};
  for (const auto& s : tc.steering) {
    req.insert({Variable::U, s.level});
    req.insert({Variable::V, s.level});
  }
  if (tc.require_thickness_max_when_extratropical) {
    req.insert({Variable::Z, Level{850}});
    req.insert({Variable::Z, Level{200}});
  }
  return {req.begin(), req.end()};
}

/// Every (member, time) must carry every required field; returns one line per
/// gap.
std::vector<std::string> manifest_gaps(const gsf::Manifest& m, const std::vector<detail::MemberIndex>& idx,
                                       const TrackerConfig& tc) {
  std::vector<std::string> gaps;
  const auto req = required_fields(tc);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    std::set<Timestamp> times;
    for (const auto& [key, path] : idx[k]) times.insert(key.time);
    const std::string who = "member " + member_label(m.members[k].member_id);
    if (!times.count(m.init_time)) gaps.push_back(who + ": no fields at init " + format_time(m.init_time));
    for (Timestamp t : times)
      for (const auto& r : req)
        if (!idx[k].count({r.variable, r.level, t}))
          gaps.push_back(who + ": " + std::string(to_string(r.variable)) + "@" + to_string(r.level) + " at " +
                         format_time(t));
  }
  return gaps;
}

std::string track_file(int member_id) {
  return "track_" + (member_id >= 0 ? "m" + std::to_string(member_id) : member_label(member_id)) + ".csv";
}

}  // namespace

int cmd_track(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const gsf::Manifest man = gsf::read_manifest(cfg.manifests.front());
  if (man.members.empty()) throw Error(Errc::EmptyInput, "manifest lists no members");
  const auto idx = detail::index_manifest(man);
  if (const auto gaps = manifest_gaps(man, idx, cfg.tracker); !gaps.empty()) {
    std::ostringstream msg;
    msg << gaps.size() << " required field(s) absent";
    for (const auto& g : gaps) msg << "\n  " << g;
    throw Error(Errc::MissingField, msg.str());
  }

  TrackPoint seed;
  seed.valid_time = man.init_time;
  if (cfg.seed_point) {
    seed.center = *cfg.seed_point;
  } else {
    const auto obs = detail::read_tracks(*cfg.observed);
    const TrackPoint* found = nullptr;
    for (const auto& t : obs)
      if (t.storm_id == man.storm_id && (found = t.at_time(man.init_time))) break;
    if (!found)
      throw Error(Errc::TimeMisalignment, "observed track has no " + man.storm_id + " position at " +
                                              format_time(man.init_time));
    seed = *found;
  }

  std::optional<Field> land;
  if (man.land_mask) land = gsf::read(man.resolve(*man.land_mask));

  std::vector<MemberResult> results(man.members.size());
  parallel_for(man.members.size(), cfg.threads, [&](std::size_t k) {
    MemberResult& r = results[k];
    r.member_id = man.members[k].member_id;
    try {
      const auto run = gsf::load_member(man, k);
      Track t = track_member(run, seed, cfg.tracker, land ? &*land : nullptr);
      t.storm_id = man.storm_id;
      t.member_id = r.member_id;
      r.track = std::move(t);
    } catch (const Error& e) {
      r.error = e.what();
      r.error_code = e.code();
    }
  });

  std::vector<Track> ok;
  std::ostringstream report;
  for (const auto& r : results) {
    if (r.track) {
      report << member_label(r.member_id) << " ok " << r.track->points.size() << " points\n";
      ok.push_back(*r.track);
    } else {
      report << member_label(r.member_id) << " failed " << r.error << "\n";
      log << "track: member " << member_label(r.member_id) << " failed: " << r.error << "\n";
    }
  }
  if (ok.empty()) throw Error(Errc::EmptyInput, "every member failed to track");

  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  Track mean = ensemble_mean_track(ok, man.storm_id);
  for (const auto& t : ok) io::write_file_atomic(out / track_file(t.member_id), tracks_to_csv(std::span(&t, 1)));
  io::write_file_atomic(out / track_file(kMeanMember), tracks_to_csv(std::span(&mean, 1)));
  std::vector<Track> all = ok;
  all.push_back(mean);
  io::write_file_atomic(out / "tracks.csv", tracks_to_csv(all));
  io::write_file_atomic(out / "track_log.txt", report.str());

  const std::size_t failed = results.size() - ok.size();
  log << "track: " << ok.size() << " of " << results.size() << " members tracked\n";
  return failed ? kExitPartial : kExitOk;
}

}  // namespace tcv::cli
