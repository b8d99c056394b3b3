#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tcv/gridops.hpp"
#include "tcv/synth.hpp"
#include "tcv/tracker.hpp"
#include "tcv/verify.hpp"

using namespace tcv;
using testing::error_code_of;
using testing::quarter_grid;

namespace {

const Timestamp kT0 = parse_time("2024-09-01T00:00:00Z");

// 20 x 30 degree domain at 0.25 degrees; extents divisible by the coarsening.
GridSpec domain() { return quarter_grid(10, 130, 81, 121); }

FieldSet uniform_wind(const GridSpec& g, double u, double v) {
  FieldSet fs(kT0);
  for (Level l : {Level{850}, Level{500}}) {
    fs.insert(Field(g, Variable::U, l, kT0, u));
    fs.insert(Field(g, Variable::V, l, kT0, v));
  }
  return fs;
}

VortexSpec vortex_at(GeoPoint c) {
  VortexSpec v;
  v.center = c;
  return v;
}

VortexSpec with_core_vorticity(GeoPoint c, double zeta) {
  VortexSpec v = vortex_at(c);
  v.peak_wind = zeta * v.radius_max_wind_km * 1000.0 / (2.0 * std::exp(1.0));
  return v;
}

TrackPoint seed_at(const Track& truth) { return truth.points.front(); }

}  // namespace

TEST_CASE("tracker config defaults and validation") {
  TrackerConfig c;
  CHECK(c.search_radius_km == 445.0);
  CHECK(c.criteria_radius_km == 278.0);
  CHECK(c.wind10m_threshold == 8.0);
  CHECK(c.vort_threshold == 5e-5);
  CHECK(c.coarsen_factor == 5);
  CHECK(c.max_displacement_factor == 3.0);
  CHECK_NOTHROW(c.validate());
  c.steering = {{Level{850}, 0.7}, {Level{500}, 0.5}};
  CHECK(error_code_of([&] { c.validate(); }) == Errc::InvalidArgument);
  c = TrackerConfig{};
  c.vort_threshold = 0;
  CHECK(error_code_of([&] { c.validate(); }) == Errc::InvalidArgument);
}

TEST_CASE("first guess from advection and extrapolation") {
  const GridSpec g = domain();
  const TrackerConfig cfg;
  const GeoPoint c{20, 150};
  TrackPoint p;
  p.center = c;

  const FieldSet westerly = uniform_wind(g, 10.0, 0.0);
  const GeoPoint guess = first_guess(std::span(&p, 1), westerly, cfg);
  CHECK(std::abs(haversine_km(c, guess) - 216.0) < 1.0);
  CHECK(azimuth_deg(c, guess) == doctest::Approx(90.0).epsilon(1e-3));

  const FieldSet calm = uniform_wind(g, 0.0, 0.0);
  const GeoPoint still = first_guess(std::span(&p, 1), calm, cfg);
  CHECK(haversine_km(c, still) < 1e-9);

  // Two points 216 km apart along the same westerly flow: both estimates agree.
  TrackPoint prev;
  prev.center = destination(c, 270.0, 216.0);
  const std::vector<TrackPoint> hist{prev, p};
  const GeoPoint both = first_guess(hist, westerly, cfg);
  const GeoPoint extrap = destination(c, 90.0, 216.0);
  CHECK(haversine_km(both, extrap) < 2.0);

  FieldSet missing(kT0);
  missing.insert(Field(g, Variable::U, Level{850}, kT0, 1.0));
  CHECK(error_code_of([&] { first_guess(std::span(&p, 1), missing, cfg); }) == Errc::MissingSteeringFields);
  CHECK(error_code_of([&] { first_guess(std::span<const TrackPoint>(), westerly, cfg); }) == Errc::InvalidArgument);
}

TEST_CASE("candidates near a synthetic vortex") {
  const GridSpec g = domain();
  const TrackerConfig cfg;
  const GeoPoint c{20.0, 145.0};
  const FieldSet fs = gen_vortex_field(vortex_at(c), g, kT0);

  const GeoPoint guess200 = destination(c, 45.0, 200.0);
  const auto near = find_candidates(fs, guess200, cfg);
  REQUIRE(near.size() == 1);
  CHECK(std::abs(near[0].where.lat - c.lat) <= 0.25);
  CHECK(std::abs(near[0].where.lon - c.lon) <= 0.25);
  CHECK(near[0].distance_km == doctest::Approx(haversine_km(near[0].where, guess200)));

  CHECK(find_candidates(fs, destination(c, 45.0, 600.0), cfg).empty());

  VortexSpec flat = vortex_at(c);
  flat.central_pressure = flat.ambient_pressure;
  CHECK(find_candidates(gen_vortex_field(flat, g, kT0), c, cfg).empty());
}

TEST_CASE("candidates without coarsening") {
  const GridSpec g = domain();
  TrackerConfig cfg;
  cfg.coarsen_factor = 1;
  const GeoPoint c{20.0, 145.0};
  const auto cands = find_candidates(gen_vortex_field(vortex_at(c), g, kT0), destination(c, 0.0, 100.0), cfg);
  REQUIRE(cands.size() == 1);
  CHECK(haversine_km(cands[0].where, c) < 20.0);
}

TEST_CASE("candidate validation thresholds") {
  const GridSpec g = domain();
  const TrackerConfig cfg;
  const GeoPoint c{20.0, 145.0};

  const FieldSet strong = gen_vortex_field(with_core_vorticity(c, 3e-4), g, kT0);
  const Validation ok = validate_candidate(c, strong, nullptr, Phase::Tropical, cfg);
  CHECK(ok.ok);
  CHECK(ok.reason == RejectReason::None);
  CHECK(ok.peak_abs_vorticity > 5e-5);
  CHECK_FALSE(ok.peak_wind);

  VortexSpec weak = with_core_vorticity(c, 1e-5);
  weak.central_pressure = 100900.0;
  const Validation bad = validate_candidate(c, gen_vortex_field(weak, g, kT0), nullptr, Phase::Tropical, cfg);
  CHECK_FALSE(bad.ok);
  CHECK(bad.reason == RejectReason::Vorticity);
  CHECK(bad.peak_abs_vorticity <= 1e-5);

  const Field land(g, Variable::LandMask, Level::surface(), kT0, 1.0);
  VortexSpec breeze = vortex_at(c);
  breeze.peak_wind = 6.0;
  const Validation windless = validate_candidate(c, gen_vortex_field(breeze, g, kT0), &land, Phase::Tropical, cfg);
  CHECK_FALSE(windless.ok);
  CHECK(windless.reason == RejectReason::Wind);
  REQUIRE(windless.peak_wind);
  CHECK(*windless.peak_wind <= 6.0);

  // Same weak-wind vortex over the ocean passes.
  const Field ocean(g, Variable::LandMask, Level::surface(), kT0, 0.0);
  CHECK(validate_candidate(c, gen_vortex_field(breeze, g, kT0), &ocean, Phase::Tropical, cfg).ok);

  FieldSet no850 = strong;
  no850 = FieldSet(kT0);
  no850.insert(strong.at(Variable::Msl, Level::surface()));
  CHECK(error_code_of([&] { validate_candidate(c, no850, nullptr, Phase::Tropical, cfg); }) == Errc::MissingField);
}

TEST_CASE("thickness criterion applies only to extratropical points when enabled") {
  const GridSpec g = domain();
  TrackerConfig cfg;
  cfg.require_thickness_max_when_extratropical = true;
  const GeoPoint c{20.0, 145.0};
  FieldSet fs = gen_vortex_field(vortex_at(c), g, kT0);
  CHECK(validate_candidate(c, fs, nullptr, Phase::Extratropical, cfg).ok);

  Field z200 = fs.at(Variable::Z, Level{200});
  for (std::size_t j = 0; j < g.nlat; ++j)
    for (std::size_t i = 0; i < g.nlon; ++i) z200.at(j, i) = 12000.0 + 10.0 * g.lat(j);
  Field z850 = fs.at(Variable::Z, Level{850});
  for (auto& x : z850.values) x = 1500.0;
  fs.insert(z200);
  fs.insert(z850);
  const Validation v = validate_candidate(c, fs, nullptr, Phase::Extratropical, cfg);
  CHECK_FALSE(v.ok);
  CHECK(v.reason == RejectReason::Thickness);
  CHECK(validate_candidate(c, fs, nullptr, Phase::Tropical, cfg).ok);
}

TEST_CASE("validation is monotone in the vorticity threshold") {
  const GridSpec g = domain();
  const GeoPoint c{20.0, 145.0};
  const FieldSet fs = gen_vortex_field(with_core_vorticity(c, 8e-5), g, kT0);
  TrackerConfig cfg;
  bool was_ok = false;
  for (double th = 2e-4; th >= 1e-6; th *= 0.8) {
    cfg.vort_threshold = th;
    const bool ok = validate_candidate(c, fs, nullptr, Phase::Tropical, cfg).ok;
    CHECK((ok || !was_ok));
    was_ok = ok;
  }
  CHECK(was_ok);
}

TEST_CASE("displacement cap") {
  const TrackerConfig cfg;
  const GeoPoint from{20, 150};
  const GeoPoint p120 = destination(from, 30.0, 120.0);
  CHECK(haversine_km(constrain_displacement(50.0, p120, from, cfg), p120) < 1e-9);
  const GeoPoint p200 = destination(from, 30.0, 200.0);
  const GeoPoint clipped = constrain_displacement(50.0, p200, from, cfg);
  CHECK(haversine_km(from, clipped) == doctest::Approx(150.0).epsilon(1e-9));
  CHECK(azimuth_deg(from, clipped) == doctest::Approx(30.0).epsilon(1e-6));
  const GeoPoint p80 = destination(from, 30.0, 80.0);
  CHECK(haversine_km(constrain_displacement(0.0, p80, from, cfg), p80) < 1e-9);
  const GeoPoint p300 = destination(from, 30.0, 300.0);
  CHECK(haversine_km(from, constrain_displacement(0.0, p300, from, cfg)) == doctest::Approx(100.0));
  CHECK(haversine_km(from, constrain_displacement(0.0, p300, from, cfg, 180.0)) == doctest::Approx(180.0));
  CHECK(error_code_of([&] { constrain_displacement(-1.0, p80, from, cfg); }) == Errc::InvalidArgument);
}

TEST_CASE("tracking a straight-moving vortex recovers the truth") {
  const GridSpec g = domain();
  const TruthRun truth = advect_truth(vortex_at({20.0, 155.0}), {270.0, 5.0}, 20, g, kT0);
  REQUIRE(truth.track.points.size() == 21);
  const TrackerConfig cfg;
  const Track t = track_member(truth.fields, seed_at(truth.track), cfg);
  REQUIRE(t.points.size() == truth.track.points.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    const double e = haversine_km(t.points[k].center, truth.track.points[k].center);
    CHECK(e <= 28.0);
    sum += e;
    CHECK(t.points[k].valid_time == truth.track.points[k].valid_time);
  }
  CHECK(sum / static_cast<double>(t.points.size()) <= 28.0);
  CHECK_NOTHROW(t.validate());
  CHECK(t.points[5].min_msl < 96500.0);
  CHECK(t.points[5].max_ws10m > 35.0);

  SUBCASE("deterministic") {
    const Track again = track_member(truth.fields, seed_at(truth.track), cfg);
    REQUIRE(again.points.size() == t.points.size());
    for (std::size_t k = 0; k < t.points.size(); ++k) {
      CHECK(again.points[k].center.lat == t.points[k].center.lat);
      CHECK(again.points[k].center.lon == t.points[k].center.lon);
      CHECK(again.points[k].min_msl == t.points[k].min_msl);
    }
  }
  SUBCASE("every step obeys the displacement cap") {
    for (std::size_t k = 2; k < t.points.size(); ++k) {
      const double prev = haversine_km(t.points[k - 2].center, t.points[k - 1].center);
      CHECK(haversine_km(t.points[k - 1].center, t.points[k].center) <= cfg.max_displacement_factor * prev + 1e-6);
    }
  }
}

TEST_CASE("tracking in the southern hemisphere and across a curved path") {
  const GridSpec g = quarter_grid(-30, 130, 81, 121);
  const TruthRun truth = advect_truth(vortex_at({-20.0, 140.0}), {120.0, 6.0}, 12, g, kT0);
  const Track t = track_member(truth.fields, seed_at(truth.track), TrackerConfig{});
  REQUIRE(t.points.size() == truth.track.points.size());
  for (std::size_t k = 0; k < t.points.size(); ++k)
    CHECK(haversine_km(t.points[k].center, truth.track.points[k].center) <= 28.0);
}

TEST_CASE("tracking stops when the vortex dissipates") {
  const GridSpec g = domain();
  const TruthRun truth = advect_truth(vortex_at({20.0, 155.0}), {270.0, 5.0}, 20, g, kT0, 8);
  CHECK(truth.track.points.size() == 9);
  const Track t = track_member(truth.fields, seed_at(truth.track), TrackerConfig{});
  CHECK(t.points.size() - 1 == 8);
}

TEST_CASE("seed over a flat field terminates immediately") {
  const GridSpec g = domain();
  VortexSpec flat = vortex_at({20.0, 150.0});
  flat.central_pressure = flat.ambient_pressure;
  const TruthRun truth = advect_truth(flat, {270.0, 5.0}, 4, g, kT0);
  TrackPoint seed;
  seed.valid_time = kT0;
  seed.center = {20.0, 150.0};
  const Track t = track_member(truth.fields, seed, TrackerConfig{});
  CHECK(t.points.size() == 1);

  seed.center = {50.0, 150.0};
  CHECK(error_code_of([&] { track_member(truth.fields, seed, TrackerConfig{}); }) == Errc::SeedOutsideDomain);
  seed.center = {20.0, 150.0};
  seed.valid_time = kT0 + kSixHours;
  CHECK(error_code_of([&] { track_member(truth.fields, seed, TrackerConfig{}); }) == Errc::TimeMisalignment);
}

TEST_CASE("ensemble tracking") {
  const GridSpec g = domain();
  const TruthRun truth = advect_truth(vortex_at({20.0, 155.0}), {270.0, 5.0}, 6, g, kT0);
  const TrackerConfig cfg;

  SUBCASE("identical members") {
    const std::vector<std::vector<FieldSet>> runs(3, truth.fields);
    const EnsembleTrackSet e = track_ensemble(runs, "SYN", seed_at(truth.track), cfg, nullptr, {}, 2);
    REQUIRE(e.members.size() == 3);
    for (const auto& m : e.members) {
      REQUIRE(m.points.size() == e.mean_track.points.size());
      for (std::size_t k = 0; k < m.points.size(); ++k) {
        CHECK(m.points[k].center.lat == doctest::Approx(e.mean_track.points[k].center.lat).epsilon(1e-12));
        CHECK(m.points[k].center.lon == doctest::Approx(e.mean_track.points[k].center.lon).epsilon(1e-12));
      }
    }
    CHECK(e.mean_track.member_id == kMeanMember);
  }

  SUBCASE("symmetric pair averages to the truth") {
    std::vector<Track> members(2);
    for (int s = 0; s < 2; ++s) {
      members[s].storm_id = "SYN";
      members[s].member_id = s;
      for (const auto& p : truth.track.points) {
        TrackPoint q = p;
        q.center = destination(p.center, s == 0 ? 0.0 : 180.0, 80.0);
        members[s].points.push_back(q);
      }
    }
    const std::vector<std::vector<FieldSet>> runs{gen_member_run(truth, members[0]), gen_member_run(truth, members[1])};
    const EnsembleTrackSet e = track_ensemble(runs, "SYN", seed_at(truth.track), cfg);
    for (std::size_t k = 0; k < e.mean_track.points.size(); ++k)
      CHECK(haversine_km(e.mean_track.points[k].center, truth.track.points[k].center) <= 28.0);
  }

  SUBCASE("48 noisy members") {
    const EnsembleTrackSet prescribed = gen_ensemble(truth.track, {8.0, 0.0, 99}, 48);
    std::vector<std::vector<FieldSet>> runs;
    for (const auto& m : prescribed.members) runs.push_back(gen_member_run(truth, m));
    const EnsembleTrackSet e = track_ensemble(runs, "SYN", seed_at(truth.track), cfg, nullptr, {}, 4);
    CHECK(e.members.size() == 48);
    std::vector<LeadEnsemble> lead;
    const Timestamp t = kT0 + kSixHours * 3;
    LeadEnsemble le;
    le.mean = e.mean_track.at_time(t)->center;
    for (const auto& m : e.members)
      if (const auto* p = m.at_time(t)) le.members.push_back(p->center);
    lead.push_back(le);
    CHECK(spread_tc(lead) > 0.0);
  }

  SUBCASE("member failures are tagged") {
    std::vector<std::vector<FieldSet>> runs{truth.fields, truth.fields};
    runs[1][0] = FieldSet(kT0);
    const std::vector<int> ids{0, 1};
    const auto results = track_members(runs, ids, seed_at(truth.track), cfg);
    CHECK(results[0].track);
    CHECK_FALSE(results[1].track);
    CHECK(results[1].error_code == Errc::MissingField);
    try {
      track_ensemble(runs, "SYN", seed_at(truth.track), cfg);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MissingField);
      CHECK(std::string(e.what()).find("member 1") != std::string::npos);
    }
  }
}

TEST_CASE("selected centres lie within the search radius of the guess") {
  const GridSpec g = domain();
  const TruthRun truth = advect_truth(vortex_at({20.0, 155.0}), {250.0, 7.0}, 10, g, kT0);
  const TrackerConfig cfg;
  const Track t = track_member(truth.fields, seed_at(truth.track), cfg);
  for (std::size_t k = 1; k < t.points.size(); ++k) {
    const std::size_t nh = std::min<std::size_t>(2, k);
    const std::span<const TrackPoint> hist(t.points.data() + k - nh, nh);
    const GeoPoint guess = first_guess(hist, truth.fields[k - 1], cfg);
    CHECK(haversine_km(guess, t.points[k].center) <= cfg.search_radius_km);
  }
}

TEST_CASE("track CSV round trip and mean track") {
  Track a{"AL09", 0, {}}, b{"AL09", 1, {}};
  for (int k = 0; k < 3; ++k) {
    a.points.push_back({kT0 + kSixHours * k, {20.0 + k, 150.0}, 99000.0, 30.0, Phase::Tropical});
    if (k < 2) b.points.push_back({kT0 + kSixHours * k, {22.0 + k, 150.0}, 98000.0, 40.0, Phase::Extratropical});
  }
  const Track mean = ensemble_mean_track(std::vector<Track>{a, b}, "AL09");
  REQUIRE(mean.points.size() == 3);
  CHECK(mean.points[0].center.lat == doctest::Approx(21.0).epsilon(1e-3));
  CHECK(mean.points[2].center.lat == doctest::Approx(22.0));
  CHECK(mean.points[0].min_msl == 98500.0);

  const std::string csv = tracks_to_csv(std::vector<Track>{a, b, mean});
  CHECK(csv.rfind("storm_id,member_id,valid_time,lat,lon,min_msl_pa,max_ws10m_ms,phase\n", 0) == 0);
  const auto back = tracks_from_csv(csv);
  REQUIRE(back.size() == 3);
  CHECK(back[2].member_id == kMeanMember);
  CHECK(back[1].points[1].phase == Phase::Extratropical);
  CHECK(back[0].points[2].center.lat == 22.0);
  CHECK(error_code_of([] { tracks_from_csv("nonsense\n1,2\n"); }) == Errc::Parse);
  CHECK(member_label(kObsMember) == "OBS");
  CHECK(parse_member_label("MEAN") == kMeanMember);
}
