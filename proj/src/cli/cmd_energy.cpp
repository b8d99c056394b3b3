#include <set>
#include <sstream>

#include "common.hpp"
#include "tcv/error.hpp"
#include "tcv/io.hpp"

namespace tcv::cli {

int cmd_energy(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const gsf::Manifest man = gsf::read_manifest(cfg.manifests.front());
  if (man.members.size() < 2)
    throw Error(Errc::TooFewMembers, "energy needs >= 2 members, manifest lists " + std::to_string(man.members.size()));
  const auto idx = detail::index_manifest(man);
  const Level lev = cfg.energy_level;

  std::set<Timestamp> times;
  for (const auto& [key, path] : idx.front())
    if (key.level == lev && key.variable == Variable::U) times.insert(key.time);
  if (times.empty()) throw Error(Errc::MissingVariable, "no u at " + to_string(lev) + " in member 0");
  for (std::size_t m = 0; m < idx.size(); ++m)
    for (Timestamp t : times)
      for (Variable v : {Variable::U, Variable::V, Variable::T, Variable::Q})
        if (!idx[m].count({v, lev, t}))
          throw Error(Errc::MissingVariable, "member " + member_label(man.members[m].member_id) + ": " +
                                                 std::string(to_string(v)) + "@" + to_string(lev) + " at " +
                                                 format_time(t));

  const std::vector<Timestamp> tv(times.begin(), times.end());
  std::vector<Field> means(tv.size());
  std::vector<double> area(tv.size());
  parallel_for(tv.size(), cfg.threads, [&](std::size_t n) {
    std::vector<FieldSet> members;
    for (const auto& mi : idx) {
      FieldSet fs(tv[n]);
      for (Variable v : {Variable::U, Variable::V, Variable::T, Variable::Q}) fs.insert(gsf::read(mi.at({v, lev, tv[n]})));
      members.push_back(std::move(fs));
    }
    const auto pert = perturbations(members, lev);
    means[n] = mte(pert, cfg.mte).mean;
    area[n] = area_mean(means[n], cfg.region);
  });

  const fs::path out = cfg.out_dir;
  fs::create_directories(out / "mte");
  std::ostringstream csv;
  csv << "valid_time,lead_h,area_mean_mte_j_per_kg\n";
  for (std::size_t n = 0; n < tv.size(); ++n) {
    gsf::write(out / "mte" / gsf::file_name(means[n]), means[n]);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", area[n]);
    csv << format_time(tv[n]) << ',' << static_cast<long long>(hours_between(man.init_time, tv[n])) << ',' << buf
        << '\n';
  }
  io::write_file_atomic(out / "mte_area_mean.csv", csv.str());

  detail::ordered_json params;
  params["metadata"] = detail::metadata_block();
  params["provenance"] = detail::provenance_block(cfg, cfg.manifests);
  params["level"] = to_string(lev);
  params["members"] = man.members.size();
  params["t_ref"] = cfg.mte.t_ref;
  params["c_p"] = cfg.mte.c_p;
  params["latent_heat"] = cfg.mte.latent_heat;
  params["epsilon"] = cfg.mte.epsilon;
  params["region"] = cfg.region ? detail::ordered_json::array({cfg.region->lat_min, cfg.region->lat_max,
                                                                cfg.region->lon_min, cfg.region->lon_max})
                                : detail::ordered_json();
  detail::write_json(out / "energy_params.json", params);
  log << "energy: " << tv.size() << " time(s) at " << to_string(lev) << "\n";
  return kExitOk;
}

}  // namespace tcv::cli
