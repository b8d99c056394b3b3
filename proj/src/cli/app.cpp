#include <CLI11.hpp>

#include "tcv/cli.hpp"
#include "tcv/error.hpp"

namespace tcv::cli {

namespace {

struct Raw {
  std::vector<std::string> manifests;
  std::string truth, tracks, compare, observed, scenario, out = "out";
  std::vector<double> seed_point, strike_grid, region;
  std::vector<std::string> vars;
  std::vector<std::string> steering;
  int level = 850;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Raw& raw, RunConfig& cfg) {
  sub->add_option("-o,--out", raw.out, "Output directory")->capture_default_str();
  sub->add_option("-j,--threads", cfg.threads, "Worker threads")->envname("TCV_THREADS")->capture_default_str();
}

void add_window(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--lead-start", cfg.window.start_h, "First lead (h, multiple of 6)")->capture_default_str();
  sub->add_option("--lead-end", cfg.window.end_h, "Last lead (h, multiple of 6)")->capture_default_str();
  sub->add_option("--lead-step", cfg.window.step_h, "Lead step (h, multiple of 6)")->capture_default_str();
}

void add_region(CLI::App* sub, Raw& raw) {
  sub->add_option("--region", raw.region, "lat_min,lat_max,lon_min,lon_max")->delimiter(',')->expected(4);
}

void add_tracker(CLI::App* sub, Raw& raw, TrackerConfig& tc) {
  sub->add_option("--search-radius-km", tc.search_radius_km)->capture_default_str();
  sub->add_option("--criteria-radius-km", tc.criteria_radius_km)->capture_default_str();
  sub->add_option("--wind-threshold", tc.wind10m_threshold, "10 m wind over land, m/s")->capture_default_str();
  sub->add_option("--vort-threshold", tc.vort_threshold, "|vorticity| at 850 hPa, 1/s")->capture_default_str();
  sub->add_option("--coarsen-factor", tc.coarsen_factor, "1 disables coarsening")->capture_default_str();
  sub->add_option("--max-displacement-factor", tc.max_displacement_factor)->capture_default_str();
  sub->add_option("--steering-radius-km", tc.steering_avg_radius_km)->capture_default_str();
  sub->add_option("--steering", raw.steering, "level:weight pairs, e.g. 850:0.5")->delimiter(',');
  sub->add_flag("--require-thickness", tc.require_thickness_max_when_extratropical,
                "Demand a 200-850 hPa thickness maximum for extratropical points");
}

std::vector<SteeringLevel> parse_steering(const std::vector<std::string>& items) {
  std::vector<SteeringLevel> out;
  for (const auto& s : items) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw Error(Errc::Parse, "steering entry '" + s + "' is not level:weight");
    out.push_back({Level{std::stoi(s.substr(0, colon))}, std::stod(s.substr(colon + 1))});
  }
  return out;
}

void finish(const Raw& raw, RunConfig& cfg) {
  for (const auto& m : raw.manifests) cfg.manifests.emplace_back(m);
  auto opt = [](const std::string& s) { return s.empty() ? std::optional<fs::path>() : std::optional<fs::path>(s); };
  cfg.truth_manifest = opt(raw.truth);
  cfg.tracks = opt(raw.tracks);
  cfg.compare_tracks = opt(raw.compare);
  cfg.observed = opt(raw.observed);
  cfg.scenario = opt(raw.scenario);
  cfg.out_dir = raw.out;
  if (raw.seed_point.size() == 2) cfg.seed_point = GeoPoint{raw.seed_point[0], raw.seed_point[1]};
  if (raw.strike_grid.size() == 6)
    cfg.strike_grid = GridSpec{raw.strike_grid[0], raw.strike_grid[1], raw.strike_grid[2], raw.strike_grid[3],
                               static_cast<std::size_t>(raw.strike_grid[4]), static_cast<std::size_t>(raw.strike_grid[5]),
                               false};
  if (raw.region.size() == 4) cfg.region = Region{raw.region[0], raw.region[1], raw.region[2], raw.region[3]};
  if (!raw.vars.empty()) {
    cfg.skill_vars.clear();
    for (const auto& v : raw.vars) cfg.skill_vars.push_back(parse_var_level(v));
  }
  if (!raw.steering.empty()) cfg.tracker.steering = parse_steering(raw.steering);
  cfg.energy_level = Level{raw.level};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Tropical cyclone tracking and ensemble verification"};
  app.set_config("--config", "", "INI/TOML file of option defaults; explicit flags win");
  app.require_subcommand(1);

  RunConfig cfg;
  Raw raw;

  auto* track = app.add_subcommand("track", "Track every member of a forecast manifest");
  track->add_option("-m,--manifest", raw.manifests, "Forecast GSF manifest")->required()->expected(1);
  track->add_option("--observed", raw.observed, "Observed track CSV (seed at the manifest init time)");
  track->add_option("--seed-point", raw.seed_point, "lat,lon seed instead of --observed")->delimiter(',')->expected(2);
  add_tracker(track, raw, cfg.tracker);
  add_common(track, raw, cfg);

  auto* verify = app.add_subcommand("verify", "Position errors, spread, strike probability, significance");
  verify->add_option("--tracks", raw.tracks, "Forecast track CSV")->required();
  verify->add_option("--observed", raw.observed, "Observed track CSV")->required();
  verify->add_option("--compare", raw.compare, "Second system's forecast track CSV");
  verify->add_option("--strike-radius-km", cfg.strike_radius_km)->capture_default_str();
  verify->add_option("--strike-resolution", cfg.strike_resolution_deg, "Default strike grid spacing, degrees")
      ->capture_default_str();
  verify->add_option("--strike-grid", raw.strike_grid, "lat0,lon0,dlat,dlon,nlat,nlon")->delimiter(',')->expected(6);
  add_window(verify, cfg);
  add_common(verify, raw, cfg);

  auto* skill = app.add_subcommand("skill", "Tercile-event ROC skill of ensemble fields");
  skill->add_option("-m,--manifest", raw.manifests, "Forecast GSF manifest(s)")->required();
  skill->add_option("--truth", raw.truth, "Truth GSF manifest")->required();
  skill->add_option("--var", raw.vars, "Variable@level, e.g. msl@surface, t@850");
  add_region(skill, raw);
  add_window(skill, cfg);
  add_common(skill, raw, cfg);

  auto* energy = app.add_subcommand("energy", "Moist total energy of ensemble perturbations");
  energy->add_option("-m,--manifest", raw.manifests, "Forecast GSF manifest")->required()->expected(1);
  energy->add_option("--level", raw.level, "Pressure level, hPa")->capture_default_str();
  energy->add_option("--epsilon", cfg.mte.epsilon, "Weight of the moisture term")->capture_default_str();
  energy->add_option("--t-ref", cfg.mte.t_ref, "Reference temperature, K")->capture_default_str();
  add_region(energy, raw);
  add_common(energy, raw, cfg);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic vortex scenario");
  synth->add_option("--scenario", raw.scenario, "Scenario key = value file")->required();
  synth->add_option("--seed", raw.seed, "Override the scenario seed");
  add_common(synth, raw, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, err);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    finish(raw, cfg);
    if (synth->parsed() && synth->count("--seed")) cfg.seed = raw.seed;
    if (track->parsed()) cfg.stage = "track";
    if (verify->parsed()) cfg.stage = "verify";
    if (skill->parsed()) cfg.stage = "skill";
    if (energy->parsed()) cfg.stage = "energy";
    if (synth->parsed()) cfg.stage = "synth";
    if (cfg.stage == "track") return cmd_track(cfg, log);
    if (cfg.stage == "verify") return cmd_verify(cfg, log);
    if (cfg.stage == "skill") return cmd_skill(cfg, log);
    if (cfg.stage == "energy") return cmd_energy(cfg, log);
    return cmd_synth(cfg, log);
  } catch (const std::exception& e) {
    err << "tcv " << cfg.stage << ": " << e.what() << "\n";
    return kExitFatal;
  }
}

}  // namespace tcv::cli
