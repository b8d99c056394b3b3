#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <random>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "tcv/cli.hpp"
#include "tcv/gsf.hpp"
#include "tcv/io.hpp"
#include "tcv/synth.hpp"

using namespace tcv;
using testing::error_code_of;
using testing::TempDir;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const Timestamp kT0 = parse_time("2024-09-01T00:00:00Z");

struct Outcome {
  int code;
  std::string out, err;
};

Outcome tcv_run(std::vector<std::string> args) {
  args.insert(args.begin(), "tcv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(io::read_file(p)); }

json without_metadata(json j) {
  j.erase("metadata");
  return j;
}

const char* kScenario = R"(grid = 10, 130, 0.25, 0.25, 81, 121
vortex.lat = 20
vortex.lon = 155
motion.bearing = 270
motion.speed = 5
steps = 8
noise.sigma_growth_km = 20
seed = 7
members = 3
)";

// One synthetic scenario shared by the track/verify cases.
const fs::path& synth_dir() {
  static TempDir dir("cli_synth");
  static bool done = [] {
    io::write_file_atomic(dir.path() / "scenario.txt", kScenario);
    const Outcome r = tcv_run({"synth", "--scenario", (dir.path() / "scenario.txt").string(), "-o",
                               (dir.path() / "run").string(), "-j", "2"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return true;
  }();
  (void)done;
  static const fs::path run = dir.path() / "run";
  return run;
}

// Writes one GSF file per field and a manifest listing them per member.
fs::path write_fixture(const fs::path& dir, const std::string& name, const std::vector<std::vector<Field>>& members,
                       int first_id = 0) {
  gsf::Manifest m;
  m.storm_id = "FIX01";
  m.init_time = kT0;
  for (std::size_t k = 0; k < members.size(); ++k) {
    gsf::MemberEntry e{first_id + static_cast<int>(k), {}};
    for (const auto& f : members[k]) {
      const std::string rel = name + "_m" + std::to_string(k) + "/" + gsf::file_name(f);
      fs::create_directories((dir / rel).parent_path());
      gsf::write(dir / rel, f);
      e.files.push_back(rel);
    }
    m.members.push_back(e);
  }
  const fs::path p = dir / (name + ".json");
  gsf::write_manifest(p, m);
  return p;
}

std::vector<json> scores(const json& skill, const std::string& sense) {
  std::vector<json> out;
  for (const auto& e : skill["scores"])
    if (e["sense"] == sense) out.push_back(e);
  return out;
}

}  // namespace

TEST_CASE("variable@level parsing") {
  const cli::VarLevel a = cli::parse_var_level("msl@surface");
  CHECK(a.variable == Variable::Msl);
  CHECK(a.level == Level::surface());
  const cli::VarLevel b = cli::parse_var_level("t@850");
  CHECK(b.variable == Variable::T);
  CHECK(b.level == Level{850});
  CHECK(cli::to_string(b) == "t@850");
  CHECK(error_code_of([] { cli::parse_var_level("t850"); }) == Errc::Parse);
}

TEST_CASE("run configuration validation") {
  cli::RunConfig c;
  c.stage = "verify";
  CHECK(error_code_of([&] { c.validate(); }) == Errc::InvalidArgument);
  c.tracks = "/nonexistent/tracks.csv";
  c.observed = "/nonexistent/obs.csv";
  CHECK(error_code_of([&] { c.validate(); }) == Errc::Io);
  c.stage = "synth";
  c.tracks.reset();
  c.observed.reset();
  c.window.end_h = 100;
  CHECK(error_code_of([&] { c.validate(); }) == Errc::InvalidArgument);
  c.stage = "bogus";
  c.window = {};
  CHECK(error_code_of([&] { c.validate(); }) == Errc::InvalidArgument);

  cli::RunConfig d;
  d.stage = "verify";
  d.tracks = "/a/b/tracks.csv";
  const std::string j = d.canonical_json();
  d.threads = 8;
  d.out_dir = "/elsewhere";
  d.tracks = "/c/tracks.csv";
  CHECK(d.canonical_json() == j);
  d.strike_radius_km = 50;
  CHECK(d.canonical_json() != j);
}

TEST_CASE("parallel_for") {
  std::vector<std::atomic<int>> hits(100);
  cli::parallel_for(hits.size(), 4, [&](std::size_t k) { hits[k]++; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](const std::atomic<int>& h) { return h == 1; }));
  CHECK(error_code_of([] {
          cli::parallel_for(10, 3, [](std::size_t k) {
            if (k == 7) throw Error(Errc::Io, "boom");
          });
        }) == Errc::Io);
  cli::parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("command line front end") {
  CHECK(tcv_run({}).code == cli::kExitFatal);
  CHECK(tcv_run({"frobnicate"}).code == cli::kExitFatal);
  const Outcome help = tcv_run({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("verify") != std::string::npos);
  const Outcome missing = tcv_run({"verify", "--tracks", "/nonexistent.csv", "--observed", "/nonexistent.csv"});
  CHECK(missing.code == cli::kExitFatal);
  CHECK(missing.err.find("Io") != std::string::npos);
}

TEST_CASE("synth outputs") {
  const fs::path& run = synth_dir();
  for (const char* f : {"scenario.txt", "land_mask.gsf", "truth_manifest.json", "truth.csv", "ensemble_tracks.csv",
                        "manifest.json"})
    CHECK(fs::exists(run / f));
  const gsf::Manifest m = gsf::read_manifest(run / "manifest.json");
  CHECK(m.members.size() == 3);
  const auto truth = tracks_from_csv(io::read_file(run / "truth.csv"));
  REQUIRE(truth.size() == 1);
  CHECK(truth[0].points.size() == 9);

  // Same seed twice is byte-identical; another seed is not.
  TempDir again("cli_synth2");
  const fs::path sc = run / "scenario.txt";
  REQUIRE(tcv_run({"synth", "--scenario", sc.string(), "-o", (again.path() / "a").string()}).code == 0);
  REQUIRE(tcv_run({"synth", "--scenario", sc.string(), "-o", (again.path() / "b").string(), "--seed", "8"}).code == 0);
  CHECK(io::read_file(again.path() / "a" / "ensemble_tracks.csv") == io::read_file(run / "ensemble_tracks.csv"));
  CHECK(io::read_file(again.path() / "a" / "members/m001" / m.members[1].files[0].substr(m.members[1].files[0].rfind('/') + 1)) ==
        io::read_file(run / m.members[1].files[0]));
  CHECK(io::read_file(again.path() / "b" / "ensemble_tracks.csv") != io::read_file(run / "ensemble_tracks.csv"));
}

TEST_CASE("track recovers the synthetic truth") {
  const fs::path& run = synth_dir();
  TempDir out("cli_track");
  const Outcome r = tcv_run({"track", "-m", (run / "truth_manifest.json").string(), "--observed",
                             (run / "truth.csv").string(), "-o", out.path().string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto truth = tracks_from_csv(io::read_file(run / "truth.csv"))[0];
  const auto got = tracks_from_csv(io::read_file(out.path() / "tracks.csv"));
  const auto it = std::find_if(got.begin(), got.end(), [](const Track& t) { return t.member_id == kObsMember; });
  REQUIRE(it != got.end());
  REQUIRE(it->points.size() == truth.points.size());
  for (std::size_t n = 0; n < truth.points.size(); ++n)
    CHECK(haversine_km(it->points[n].center, truth.points[n].center) <= 28.0);
  CHECK(fs::exists(out.path() / "track_log.txt"));
  CHECK(fs::exists(out.path() / "track_MEAN.csv"));

  // Members, two threads.
  TempDir mem("cli_track_m");
  const Outcome rm = tcv_run({"track", "-m", (run / "manifest.json").string(), "--seed-point", "20,155", "-o",
                              mem.path().string(), "-j", "2"});
  CHECK_MESSAGE((rm.code == cli::kExitOk || rm.code == cli::kExitPartial), rm.err);
  for (int m = 0; m < 3; ++m) CHECK(fs::exists(mem.path() / ("track_m" + std::to_string(m) + ".csv")));
}

TEST_CASE("track input validation") {
  const fs::path& run = synth_dir();
  TempDir dir("cli_track_bad");
  gsf::Manifest m = gsf::read_manifest(run / "truth_manifest.json");
  auto& files = m.members[0].files;
  files.erase(std::remove_if(files.begin(), files.end(),
                             [&](const std::string& f) {
                               const auto h = gsf::read_header(m.resolve(f));
                               return h.level == Level{850} && (h.variable == Variable::U || h.variable == Variable::V);
                             }),
              files.end());
  // Keep paths resolvable from the new manifest location.
  for (auto& f : files) f = fs::absolute(m.resolve(f)).string();
  if (m.land_mask) m.land_mask = fs::absolute(m.resolve(*m.land_mask)).string();
  gsf::write_manifest(dir.path() / "no850.json", m);

  const fs::path out = dir.path() / "out";
  const Outcome r = tcv_run({"track", "-m", (dir.path() / "no850.json").string(), "--observed",
                             (run / "truth.csv").string(), "-o", out.string()});
  CHECK(r.code == cli::kExitFatal);
  CHECK(r.err.find("MissingField") != std::string::npos);
  CHECK(r.err.find("850") != std::string::npos);
  CHECK_FALSE(fs::exists(out));

  gsf::Manifest empty = m;
  empty.members.clear();
  gsf::write_manifest(dir.path() / "empty.json", empty);
  const Outcome e = tcv_run({"track", "-m", (dir.path() / "empty.json").string(), "--seed-point", "20,155", "-o",
                             out.string()});
  CHECK(e.code == cli::kExitFatal);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("verify reports") {
  const fs::path& run = synth_dir();
  TempDir dir("cli_verify");
  Track truth = tracks_from_csv(io::read_file(run / "truth.csv"))[0];
  Track same = truth;
  same.member_id = 0;
  io::write_file_atomic(dir.path() / "same.csv", tracks_to_csv(std::span<const Track>(&same, 1)));
  Track shifted = same;
  for (auto& p : shifted.points) p.center = destination(p.center, 0.0, 100.0);
  io::write_file_atomic(dir.path() / "shifted.csv", tracks_to_csv(std::span<const Track>(&shifted, 1)));

  SUBCASE("forecast equals observation, single member") {
    const fs::path out = dir.path() / "same_out";
    const Outcome r = tcv_run({"verify", "--tracks", (dir.path() / "same.csv").string(), "--observed",
                               (run / "truth.csv").string(), "-o", out.string(), "--lead-end", "48"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json j = read_json(out / "verify_report.json");
    CHECK(j["acc_error_km"].get<double>() == 0.0);
    CHECK(j["acc_spread_km"].get<double>() == 0.0);
    CHECK(j["n_cases"] == 1);
    CHECK(j["samples"].size() == 8);
    for (const auto& s : j["samples"]) {
      CHECK(s["error_km"].get<double>() == 0.0);
      CHECK(s["spread_km"].get<double>() == 0.0);
    }
    CHECK(j["provenance"]["inputs"].size() == 2);
    CHECK(j["provenance"]["config_sha256"].get<std::string>().size() == 64);
    CHECK(fs::exists(out / "strike_merged.gsf"));
    CHECK(fs::exists(out / "verify_leads.csv"));
    CHECK(fs::exists(out / "verify_samples.csv"));
    const Field strike = gsf::read(out / "strike_merged.gsf");
    const auto near = strike.spec.nearest(truth.points[3].center);
    REQUIRE(near);
    CHECK(strike.at(near->first, near->second) == 100.0);
  }

  SUBCASE("two-system comparison") {
    const fs::path out = dir.path() / "cmp_out";
    const Outcome r = tcv_run({"verify", "--tracks", (dir.path() / "same.csv").string(), "--compare",
                               (dir.path() / "shifted.csv").string(), "--observed", (run / "truth.csv").string(),
                               "-o", out.string(), "--lead-end", "48"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json j = read_json(out / "verify_report.json");
    const json& pooled = j["significance"]["pooled"];
    CHECK(pooled["p"].get<double>() < 0.05);
    CHECK(pooled["u"].get<double>() == 0.0);
    CHECK(j["significance"]["compare_acc_error_km"].get<double>() == doctest::Approx(800.0).epsilon(1e-6));
  }

  SUBCASE("rerun reproduces the report") {
    const std::vector<std::string> base{"verify", "--tracks", (run / "ensemble_tracks.csv").string(), "--observed",
                                        (run / "truth.csv").string(), "--lead-end", "48"};
    auto a = base, b = base;
    a.insert(a.end(), {"-o", (dir.path() / "r1").string()});
    b.insert(b.end(), {"-o", (dir.path() / "r2").string(), "-j", "3"});
    REQUIRE(tcv_run(a).code == 0);
    REQUIRE(tcv_run(b).code == 0);
    CHECK(without_metadata(read_json(dir.path() / "r1/verify_report.json")) ==
          without_metadata(read_json(dir.path() / "r2/verify_report.json")));
    CHECK(io::read_file(dir.path() / "r1/verify_samples.csv") == io::read_file(dir.path() / "r2/verify_samples.csv"));
    CHECK(io::read_file(dir.path() / "r1/strike_merged.gsf") == io::read_file(dir.path() / "r2/strike_merged.gsf"));
  }

  SUBCASE("config file defaults lose to explicit flags") {
    io::write_file_atomic(dir.path() / "cfg.ini", "[verify]\nlead-end = 24\nstrike-radius-km = 80\n");
    const std::vector<std::string> base{"--config", (dir.path() / "cfg.ini").string(), "verify", "--tracks",
                                        (dir.path() / "same.csv").string(), "--observed", (run / "truth.csv").string()};
    auto a = base, b = base;
    a.insert(a.end(), {"-o", (dir.path() / "c1").string()});
    b.insert(b.end(), {"-o", (dir.path() / "c2").string(), "--lead-end", "12"});
    REQUIRE(tcv_run(a).code == 0);
    REQUIRE(tcv_run(b).code == 0);
    const json ja = read_json(dir.path() / "c1/verify_report.json"), jb = read_json(dir.path() / "c2/verify_report.json");
    CHECK(ja["window"]["end_h"] == 24);
    CHECK(ja["strike"]["radius_km"].get<double>() == 80.0);
    CHECK(jb["window"]["end_h"] == 12);
  }

  SUBCASE("unmatched storm") {
    Track other = same;
    other.storm_id = "ZZ99";
    io::write_file_atomic(dir.path() / "other.csv", tracks_to_csv(std::span<const Track>(&other, 1)));
    const Outcome r = tcv_run({"verify", "--tracks", (dir.path() / "other.csv").string(), "--observed",
                               (run / "truth.csv").string(), "-o", (dir.path() / "u").string()});
    CHECK(r.code == cli::kExitFatal);
    CHECK(r.err.find("UnmatchedStorm") != std::string::npos);
  }
}

TEST_CASE("skill") {
  TempDir dir("cli_skill");
  const GridSpec g{-45, 100, 0.5, 1, 100, 100, false};
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(285.0, 4.0);
  std::vector<Field> truth;
  for (int lead = 0; lead <= 54; lead += 6) {
    Field f(g, Variable::T, Level{850}, kT0 + Seconds{lead * 3600});
    for (auto& x : f.values) x = n(rng);
    truth.push_back(f);
  }
  auto negate = [](std::vector<Field> fs) {
    for (auto& f : fs)
      for (auto& x : f.values) x = -x;
    return fs;
  };
  const fs::path tm = write_fixture(dir.path(), "truth", {truth}, kObsMember);
  const fs::path perfect = write_fixture(dir.path(), "perfect", {truth, truth, truth, truth});
  std::vector<std::vector<Field>> shuffled(4, truth);
  for (auto& member : shuffled)
    for (auto& f : member) std::shuffle(f.values.begin(), f.values.end(), rng);
  const fs::path noskill = write_fixture(dir.path(), "noskill", shuffled);
  const fs::path ntm = write_fixture(dir.path(), "ntruth", {negate(truth)}, kObsMember);
  std::vector<std::vector<Field>> neg;
  for (const auto& m : shuffled) neg.push_back(negate(m));
  const fs::path nnoskill = write_fixture(dir.path(), "nnoskill", neg);

  auto skill = [&](const fs::path& fc, const fs::path& tr, const std::string& tag) {
    const fs::path out = dir.path() / tag;
    const Outcome r = tcv_run({"skill", "-m", fc.string(), "--truth", tr.string(), "--var", "t@850", "-o",
                               out.string(), "--lead-end", "54"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return read_json(out / "skill.json");
  };

  SUBCASE("replicated truth is a perfect forecast") {
    const json j = skill(perfect, tm, "p");
    REQUIRE(j["scores"].size() == 18);
    for (const auto& e : j["scores"]) {
      CHECK(e["rocass"].get<double>() == 1.0);
      CHECK(e["n_total"] == 10000);
    }
    CHECK(fs::exists(dir.path() / "p/roc_points.csv"));
  }
  SUBCASE("shuffled members have no skill") {
    const json j = skill(noskill, tm, "s");
    for (const auto& e : j["scores"]) CHECK(std::abs(e["rocass"].get<double>()) <= 0.05);
  }
  SUBCASE("lower sense on negated fields mirrors upper sense") {
    const json a = skill(noskill, tm, "a"), b = skill(nnoskill, ntm, "b");
    const auto up = scores(a, "upper"), lo = scores(b, "lower");
    REQUIRE(up.size() == lo.size());
    for (std::size_t k = 0; k < up.size(); ++k) {
      CHECK(up[k]["lead_h"] == lo[k]["lead_h"]);
      CHECK(up[k]["n_events"] == lo[k]["n_events"]);
      CHECK(up[k]["roca"].get<double>() == doctest::Approx(lo[k]["roca"].get<double>()).epsilon(1e-12));
    }
  }
  SUBCASE("too few truth fields") {
    const fs::path small = write_fixture(dir.path(), "small", {{truth[0], truth[1]}}, kObsMember);
    const Outcome r = tcv_run({"skill", "-m", perfect.string(), "--truth", small.string(), "--var", "t@850", "-o",
                               (dir.path() / "x").string()});
    CHECK(r.code == cli::kExitFatal);
    CHECK(r.err.find("InsufficientSample") != std::string::npos);
    CHECK(r.err.find("t@850") != std::string::npos);
  }
}

TEST_CASE("energy") {
  TempDir dir("cli_energy");
  const GridSpec g{10, 140, 0.5, 0.5, 9, 11, false};
  const Level l850{850};
  auto member = [&](double du, double dt, bool patch) {
    std::vector<Field> fs;
    for (int lead : {0, 6}) {
      const Timestamp t = kT0 + Seconds{lead * 3600};
      fs.emplace_back(g, Variable::U, l850, t, 4.0 + du);
      fs.emplace_back(g, Variable::V, l850, t, -2.0);
      fs.emplace_back(g, Variable::T, l850, t, 288.0 + dt);
      Field q(g, Variable::Q, l850, t, 0.0078125);
      if (patch) q.at(4, 5) += 0.001953125;
      fs.push_back(q);
    }
    return fs;
  };
  auto energy = [&](const fs::path& manifest, const std::string& tag, std::vector<std::string> extra = {}) {
    const fs::path out = dir.path() / tag;
    std::vector<std::string> args{"energy", "-m", manifest.string(), "-o", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const Outcome r = tcv_run(args);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    std::vector<Field> rasters;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(out / "mte")) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) rasters.push_back(gsf::read(f));
    return rasters;
  };

  SUBCASE("identical members") {
    const auto r = energy(write_fixture(dir.path(), "same", {member(0, 0, false), member(0, 0, false)}), "same");
    REQUIRE(r.size() == 2);
    for (const auto& f : r)
      for (double x : f.values) CHECK(x == 0.0);
    CHECK(fs::exists(dir.path() / "same/mte_area_mean.csv"));
    CHECK(read_json(dir.path() / "same/energy_params.json")["epsilon"].get<double>() == 1.0);
  }
  SUBCASE("humidity patch") {
    const auto r = energy(
        write_fixture(dir.path(), "patch", {member(0, 0, true), member(0, 0, false), member(0, 0, false)}), "patch");
    const double latent = 2.51e6 * 2.51e6 / (1005.7 * 270.0);
    const double d = 0.001953125;
    // Perturbations 2d/3, -d/3, -d/3; mean of squares is (2/9) d^2.
    const double expect = latent * d * d * 2.0 / 9.0;
    for (const auto& f : r)
      for (std::size_t j = 0; j < g.nlat; ++j)
        for (std::size_t i = 0; i < g.nlon; ++i) {
          if (j == 4 && i == 5) CHECK(f.at(j, i) == doctest::Approx(expect).epsilon(1e-6));
          else CHECK(f.at(j, i) == 0.0);
        }
  }
  SUBCASE("epsilon zero drops the humidity term") {
    const std::vector<std::vector<Field>> m{member(1.5, -0.5, true), member(-1.5, 0.5, false)};
    const auto r = energy(write_fixture(dir.path(), "dry", m), "dry", {"--epsilon", "0"});
    // u' = +-1.5, T' = -+0.5 at every point.
    const double expect = 0.5 * 2.25 + 1005.7 / 270.0 * 0.25;
    for (const auto& f : r)
      for (double x : f.values) CHECK(x == doctest::Approx(expect).epsilon(1e-6));
  }
  SUBCASE("one member is too few") {
    const fs::path p = write_fixture(dir.path(), "one", {member(0, 0, false)});
    const Outcome r = tcv_run({"energy", "-m", p.string(), "-o", (dir.path() / "one").string()});
    CHECK(r.code == cli::kExitFatal);
    CHECK(r.err.find("TooFewMembers") != std::string::npos);
    CHECK_FALSE(fs::exists(dir.path() / "one"));
  }
}
