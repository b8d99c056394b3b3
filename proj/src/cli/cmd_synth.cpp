#include <string>

#include "common.hpp"
#include "tcv/error.hpp"
#include "tcv/io.hpp"
#include "tcv/synth.hpp"

namespace tcv::cli {

namespace {

std::vector<std::string> write_run(const std::vector<FieldSet>& run, const fs::path& root, const fs::path& rel_dir) {
  fs::create_directories(root / rel_dir);
  std::vector<std::string> files;
  for (const auto& step : run)
    for (const auto& [key, f] : step.fields()) {
      const fs::path rel = rel_dir / gsf::file_name(f);
      gsf::write(root / rel, f);
      files.push_back(rel.generic_string());
    }
  return files;
}

std::string member_dir(int m) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "m%03d", m);
  return buf;
}

}  // namespace

int cmd_synth(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  Scenario sc = parse_scenario(io::read_file(*cfg.scenario));
  if (cfg.seed) sc.noise.seed = *cfg.seed;
  sc.validate();

  // Everything that can fail on bad input happens before the first write.
  const TruthRun truth = advect_truth(sc.vortex, sc.motion, sc.steps, sc.grid, sc.init_time, sc.dissipate_after,
                                      kSixHours, sc.storm_id);
  const EnsembleTrackSet ens = gen_ensemble(truth.track, sc.noise, sc.members);

  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  io::write_file_atomic(out / "scenario.txt", format_scenario(sc));

  const Field land = gen_land_mask(sc.grid, sc.land);
  gsf::write(out / "land_mask.gsf", land);

  gsf::Manifest tm;
  tm.storm_id = sc.storm_id;
  tm.init_time = sc.init_time;
  tm.land_mask = "land_mask.gsf";
  tm.members.push_back({kObsMember, write_run(truth.fields, out, "truth")});
  gsf::write_manifest(out / "truth_manifest.json", tm);

  Track obs = truth.track;
  io::write_file_atomic(out / "truth.csv", tracks_to_csv(std::span<const Track>(&obs, 1)));
  io::write_file_atomic(out / "ensemble_tracks.csv", tracks_to_csv(ens.members));
  log << "synth: truth track with " << truth.track.points.size() << " points, " << ens.members.size()
      << " member tracks\n";

  if (sc.member_fields) {
    gsf::Manifest mm = tm;
    mm.members.clear();
    mm.members.resize(ens.members.size());
    parallel_for(ens.members.size(), cfg.threads, [&](std::size_t m) {
      const auto run = gen_member_run(truth, ens.members[m]);
      mm.members[m] = {ens.members[m].member_id, write_run(run, out, fs::path("members") / member_dir(static_cast<int>(m)))};
    });
    gsf::write_manifest(out / "manifest.json", mm);
    log << "synth: wrote member fields for " << mm.members.size() << " members\n";
  }
  return kExitOk;
}

}  // namespace tcv::cli
