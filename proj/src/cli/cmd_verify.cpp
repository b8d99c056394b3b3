#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "common.hpp"
#include "tcv/error.hpp"
#include "tcv/io.hpp"

namespace tcv::cli {

namespace {

using detail::num;
using detail::ordered_json;

/// Forecast rows grouped into (storm, init) ensembles. MEAN rows are ignored
/// unless a storm has nothing else, in which case they act as one member.
std::vector<EnsembleTrackSet> group_cases(const std::vector<Track>& tracks) {
  std::map<std::pair<std::string, Timestamp>, std::vector<Track>> groups;
  std::map<std::string, bool> has_members;
  for (const auto& t : tracks)
    if (t.member_id >= 0 && !t.empty()) has_members[t.storm_id] = true;
  for (const auto& t : tracks) {
    if (t.empty() || t.member_id == kObsMember) continue;
    if (t.member_id == kMeanMember && has_members[t.storm_id]) continue;
    groups[{t.storm_id, t.start()}].push_back(t);
  }
  std::vector<EnsembleTrackSet> cases;
  for (auto& [key, members] : groups) cases.push_back(make_ensemble(key.first, key.second, std::move(members)));
  return cases;
}

std::vector<Track> observed_tracks(const std::vector<Track>& rows) {
  std::map<std::string, Track> by_storm;
  for (const auto& t : rows) {
    auto [it, inserted] = by_storm.try_emplace(t.storm_id, t);
    if (!inserted && t.member_id == kObsMember) it->second = t;
  }
  std::vector<Track> out;
  for (auto& [id, t] : by_storm) out.push_back(std::move(t));
  return out;
}

GridSpec default_strike_grid(const std::vector<EnsembleTrackSet>& cases, double res) {
  double lat_lo = 90, lat_hi = -90, lon_lo = 1e9, lon_hi = -1e9;
  std::optional<double> ref;
  for (const auto& c : cases)
    for (const auto& m : c.members)
      for (const auto& p : m.points) {
        if (!ref) ref = p.center.lon;
        const double lon = *ref + normalize_lon(p.center.lon - *ref);
        lat_lo = std::min(lat_lo, p.center.lat);
        lat_hi = std::max(lat_hi, p.center.lat);
        lon_lo = std::min(lon_lo, lon);
        lon_hi = std::max(lon_hi, lon);
      }
  if (!ref) throw Error(Errc::EmptyInput, "no forecast positions for the strike grid");
  const double pad = 2.0;
  const double lat0 = std::max(-90.0, std::floor((lat_lo - pad) / res) * res);
  const double lat1 = std::min(90.0, std::ceil((lat_hi + pad) / res) * res);
  const double lon0 = std::floor((lon_lo - pad) / res) * res;
  const double lon1 = std::ceil((lon_hi + pad) / res) * res;
  GridSpec g{lat0, lon0, res, res, static_cast<std::size_t>(std::llround((lat1 - lat0) / res)) + 1,
             static_cast<std::size_t>(std::llround((lon1 - lon0) / res)) + 1, false};
  g.validate();
  return g;
}

ordered_json stats_json(const SampleStats& s) {
  return {{"n", s.n},           {"mean", num(s.mean)}, {"std", num(s.std)},         {"median", num(s.median)},
          {"min", num(s.min)}, {"max", num(s.max)},   {"mean_abs", num(s.mean_abs)}};
}

ordered_json mw_json(const MannWhitney& r, std::size_t na, std::size_t nb) {
  return {{"n_a", na}, {"n_b", nb}, {"u_a", r.u_a}, {"u_b", r.u_b}, {"u", r.u}, {"p", num(r.p)},
          {"exact", r.exact}, {"significant_0_05", r.p < 0.05}};
}

std::string csv_num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto cases = group_cases(detail::read_tracks(*cfg.tracks));
  if (cases.empty()) throw Error(Errc::EmptyInput, "no forecast tracks in " + cfg.tracks->string());
  const auto observed = observed_tracks(detail::read_tracks(*cfg.observed));
  const VerificationResult res = verify_cases(cases, observed, cfg.window);

  std::optional<VerificationResult> other;
  if (cfg.compare_tracks) {
    const auto other_cases = group_cases(detail::read_tracks(*cfg.compare_tracks));
    if (other_cases.empty()) throw Error(Errc::EmptyInput, "no forecast tracks in " + cfg.compare_tracks->string());
    other = verify_cases(other_cases, observed, cfg.window);
  }

  const GridSpec grid = cfg.strike_grid ? *cfg.strike_grid : default_strike_grid(cases, cfg.strike_resolution_deg);
  std::vector<StrikeProbabilityField> strikes(cases.size());
  parallel_for(cases.size(), cfg.threads,
               [&](std::size_t k) { strikes[k] = strike_probability(cases[k], grid, cfg.strike_radius_km); });

  const fs::path out = cfg.out_dir;
  fs::create_directories(out);

  ordered_json strike_j = ordered_json::array();
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const std::string name = "strike_" + cases[k].storm_id + "_" + compact_time(cases[k].init_time) + ".gsf";
    strikes[k].prob.valid_time = cases[k].init_time;
    gsf::write(out / name, strikes[k].prob);
    const auto mx = std::max_element(strikes[k].prob.values.begin(), strikes[k].prob.values.end());
    strike_j.push_back({{"storm_id", cases[k].storm_id},
                        {"init_time", format_time(cases[k].init_time)},
                        {"members", cases[k].members.size()},
                        {"file", name},
                        {"max_percent", *mx}});
  }
  const StrikeProbabilityField merged = merge_strike(strikes);
  gsf::write(out / "strike_merged.gsf", merged.prob);

  ordered_json leads = ordered_json::array();
  for (const auto& l : res.leads)
    leads.push_back({{"lead_h", l.lead_h},
                     {"n_cases", l.n_cases},
                     {"error_km", num(l.error_km)},
                     {"spread_km", num(l.spread_km)},
                     {"along_track", stats_json(l.at)},
                     {"cross_track", stats_json(l.ct)}});
  ordered_json samples = ordered_json::array();
  for (const auto& s : res.samples)
    samples.push_back({{"storm_id", s.storm_id},
                       {"init_time", format_time(s.init_time)},
                       {"lead_h", s.lead_h},
                       {"error_km", num(s.error_km)},
                       {"spread_km", num(s.spread_km)},
                       {"at_km", s.at_km ? num(*s.at_km) : ordered_json()},
                       {"ct_km", s.ct_km ? num(*s.ct_km) : ordered_json()},
                       {"dpe_km", num(s.dpe_km)},
                       {"n_members", s.n_members}});

  ordered_json sig;
  if (other) {
    auto errors = [](const VerificationResult& r, std::optional<int> lead) {
      std::vector<double> v;
      for (const auto& s : r.samples)
        if (!lead || s.lead_h == *lead) v.push_back(s.error_km);
      return v;
    };
    const auto a = errors(res, std::nullopt), b = errors(*other, std::nullopt);
    sig["metric"] = "error_km";
    sig["pooled"] = (a.empty() || b.empty()) ? ordered_json() : mw_json(mann_whitney_u(a, b), a.size(), b.size());
    ordered_json per = ordered_json::array();
    for (int lead : cfg.window.leads()) {
      const auto la = errors(res, lead), lb = errors(*other, lead);
      if (la.empty() || lb.empty()) continue;
      ordered_json e = mw_json(mann_whitney_u(la, lb), la.size(), lb.size());
      e["lead_h"] = lead;
      per.push_back(std::move(e));
    }
    sig["per_lead"] = per;
    sig["compare_acc_error_km"] = num(other->acc_error_km);
    sig["compare_acc_spread_km"] = num(other->acc_spread_km);
  }

  std::vector<fs::path> inputs{*cfg.tracks, *cfg.observed};
  if (cfg.compare_tracks) inputs.push_back(*cfg.compare_tracks);

  ordered_json report;
  report["metadata"] = detail::metadata_block();
  report["provenance"] = detail::provenance_block(cfg, inputs);
  report["window"] = {{"start_h", cfg.window.start_h}, {"end_h", cfg.window.end_h}, {"step_h", cfg.window.step_h}};
  report["n_cases"] = cases.size();
  report["acc_error_km"] = num(res.acc_error_km);
  report["acc_spread_km"] = num(res.acc_spread_km);
  report["leads"] = leads;
  report["samples"] = samples;
  report["strike"] = {{"radius_km", cfg.strike_radius_km},
                      {"grid", {grid.lat0, grid.lon0, grid.dlat, grid.dlon, grid.nlat, grid.nlon}},
                      {"cases", strike_j},
                      {"merged_file", "strike_merged.gsf"}};
  report["significance"] = sig;
  detail::write_json(out / "verify_report.json", report);

  std::ostringstream lc;
  lc << "lead_h,n_cases,error_km,spread_km,at_mean_km,ct_mean_km\n";
  for (const auto& l : res.leads)
    lc << l.lead_h << ',' << l.n_cases << ',' << csv_num(l.error_km) << ',' << csv_num(l.spread_km) << ','
       << (l.at.n ? csv_num(l.at.mean) : "") << ',' << (l.ct.n ? csv_num(l.ct.mean) : "") << '\n';
  io::write_file_atomic(out / "verify_leads.csv", lc.str());

  std::ostringstream sc;
  sc << "storm_id,init_time,lead_h,error_km,spread_km,at_km,ct_km,dpe_km,n_members\n";
  for (const auto& s : res.samples)
    sc << s.storm_id << ',' << format_time(s.init_time) << ',' << s.lead_h << ',' << csv_num(s.error_km) << ','
       << csv_num(s.spread_km) << ',' << (s.at_km ? csv_num(*s.at_km) : "") << ','
       << (s.ct_km ? csv_num(*s.ct_km) : "") << ',' << csv_num(s.dpe_km) << ',' << s.n_members << '\n';
  io::write_file_atomic(out / "verify_samples.csv", sc.str());

  log << "verify: " << cases.size() << " case(s), " << res.samples.size() << " samples, AccError "
      << res.acc_error_km << " km, AccSpread " << res.acc_spread_km << " km\n";
  return kExitOk;
}

}  // namespace tcv::cli
