#include "tcv/tracker.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "tcv/error.hpp"
#include "tcv/gridops.hpp"

namespace tcv {

void TrackerConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(Errc::InvalidArgument, "tracker config: " + m); };
  if (!(search_radius_km > 0) || !(criteria_radius_km > 0) || !(steering_avg_radius_km > 0))
    fail("radii must be positive");
  if (!(wind10m_threshold > 0) || !(vort_threshold > 0)) fail("thresholds must be positive");
  if (coarsen_factor < 1) fail("coarsen_factor must be >= 1");
  if (!(max_displacement_factor > 0) || !(first_step_floor_km > 0)) fail("displacement limits must be positive");
  if (!(step_seconds > 0)) fail("step must be positive");
  if (steering.empty()) fail("at least one steering level required");
  double sum = 0.0;
  for (const auto& s : steering) {
    if (!(s.weight > 0)) fail("steering weights must be positive");
    sum += s.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail("steering weights must sum to 1");
}

std::string_view to_string(RejectReason r) noexcept {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::Vorticity: return "vorticity";
    case RejectReason::Wind: return "wind";
    case RejectReason::Thickness: return "thickness";
  }
  return "unknown";
}

namespace {

/// Derived fields of one time step, computed on first use. Not shared across
/// threads.
class StepCache {
 public:
  StepCache(const FieldSet& fs, const TrackerConfig& cfg) : fs_(fs), cfg_(cfg) {}

  const FieldSet& fields() const { return fs_; }
  const Field& msl() const { return fs_.at(Variable::Msl, Level::surface()); }

  const Field& msl_coarse() {
    if (!msl_coarse_) msl_coarse_ = cfg_.coarsen_factor > 1 ? downsample(msl(), cfg_.coarsen_factor) : msl();
    return *msl_coarse_;
  }
  const Field& vort10_full() {
    if (!vort10_full_)
      vort10_full_ = relative_vorticity(fs_.at(Variable::U, Level::surface()), fs_.at(Variable::V, Level::surface()));
    return *vort10_full_;
  }
  const Field& vort10_coarse() {
    if (!vort10_coarse_) {
      if (cfg_.coarsen_factor > 1) {
        vort10_coarse_ = relative_vorticity(downsample(fs_.at(Variable::U, Level::surface()), cfg_.coarsen_factor),
                                            downsample(fs_.at(Variable::V, Level::surface()), cfg_.coarsen_factor));
      } else {
        vort10_coarse_ = vort10_full();
      }
    }
    return *vort10_coarse_;
  }
  const Field& vort850() {
    if (!vort850_)
      vort850_ = relative_vorticity(fs_.at(Variable::U, Level{850}), fs_.at(Variable::V, Level{850}));
    return *vort850_;
  }
  const Field& ws10() {
    if (!ws10_) ws10_ = wind_speed(fs_.at(Variable::U, Level::surface()), fs_.at(Variable::V, Level::surface()));
    return *ws10_;
  }
  const Field& thickness() {
    if (!thickness_)
      thickness_ = difference(fs_.at(Variable::Z, Level{200}), fs_.at(Variable::Z, Level{850}), Variable::Z);
    return *thickness_;
  }

 private:
  const FieldSet& fs_;
  const TrackerConfig& cfg_;
  std::optional<Field> msl_coarse_, vort10_full_, vort10_coarse_, vort850_, ws10_, thickness_;
};

double max_abs_within(const Field& f, GeoPoint c, double radius_km) {
  double best = 0.0;
  bool any = false;
  for_each_in_radius(f.spec, c, radius_km, [&](std::size_t j, std::size_t i, double) {
    const std::size_t k = f.spec.index(j, i);
    if (f.is_missing(k)) return;
    best = std::max(best, std::abs(f.values[k]));
    any = true;
  });
  return any ? best : 0.0;
}

/// Extreme of the full-resolution field inside the coarse cell centred on
/// full-grid index (jc, ic).
GridHit refine_in_cell(const Field& f, std::size_t jc, std::size_t ic, int factor, ExtremeMode mode) {
  const GridSpec& g = f.spec;
  const auto half = static_cast<std::ptrdiff_t>(factor / 2);
  GridHit best;
  bool found = false;
  long best_d2 = 0;
  for (std::ptrdiff_t dj = -half; dj <= half; ++dj) {
    const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(jc) + dj;
    if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(g.nlat)) continue;
    for (std::ptrdiff_t di = -half; di <= half; ++di) {
      std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(ic) + di;
      const auto n = static_cast<std::ptrdiff_t>(g.nlon);
      if (g.wraps_lon) ii = (ii + n) % n;
      else if (ii < 0 || ii >= n) continue;
      const std::size_t k = g.index(static_cast<std::size_t>(jj), static_cast<std::size_t>(ii));
      if (f.is_missing(k)) continue;
      const double v = f.values[k];
      const long d2 = static_cast<long>(dj * dj + di * di);
      bool take = !found || (mode == ExtremeMode::Min ? v < best.value : v > best.value);
      if (!take && v == best.value) take = d2 < best_d2;
      if (take) {
        best = {v, g.point(static_cast<std::size_t>(jj), static_cast<std::size_t>(ii)), static_cast<std::size_t>(jj),
                static_cast<std::size_t>(ii), 0.0};
        best_d2 = d2;
        found = true;
      }
    }
  }
  if (!found) throw Error(Errc::EmptyNeighborhood, "coarse cell has no valid points");
  return best;
}

std::vector<Candidate> candidates_from(StepCache& step, GeoPoint guess, const TrackerConfig& cfg) {
  const int f = cfg.coarsen_factor;
  const auto fac = static_cast<std::size_t>(f);
  // Cyclonic vorticity is negative south of the equator.
  const ExtremeMode vort_mode = guess.lat >= 0.0 ? ExtremeMode::Max : ExtremeMode::Min;

  std::vector<Candidate> raw;
  auto add = [&](const std::vector<GridHit>& hits, const Field& full, ExtremeMode mode, CandidateSource src) {
    for (const auto& h : hits) {
      GeoPoint where = h.where;
      if (f > 1) where = refine_in_cell(full, h.j * fac, h.i * fac, f, mode).where;
      raw.push_back({where, src, haversine_km(guess, where)});
    }
  };
  add(local_extrema(step.msl_coarse(), guess, cfg.search_radius_km, ExtremeMode::Min), step.msl(), ExtremeMode::Min,
      CandidateSource::MslMinimum);
  const auto vort_hits = local_extrema(step.vort10_coarse(), guess, cfg.search_radius_km, vort_mode);
  if (!vort_hits.empty()) add(vort_hits, step.vort10_full(), vort_mode, CandidateSource::VorticityMaximum);

  std::stable_sort(raw.begin(), raw.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance_km != b.distance_km) return a.distance_km < b.distance_km;
    return a.source < b.source;
  });
  const double cell_km = static_cast<double>(f) * step.msl().spec.row_spacing_km();
  std::vector<Candidate> out;
  for (const auto& c : raw) {
    if (c.distance_km > cfg.search_radius_km) continue;
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const Candidate& k) { return haversine_km(k.where, c.where) < cell_km; });
    if (!dup) out.push_back(c);
  }
  return out;
}

Validation validate_with(StepCache& step, GeoPoint c, const Field* land_mask, Phase phase, const TrackerConfig& cfg) {
  Validation v;
  v.peak_abs_vorticity = max_abs_within(step.vort850(), c, cfg.criteria_radius_km);
  if (!(v.peak_abs_vorticity >= cfg.vort_threshold)) {
    v.reason = RejectReason::Vorticity;
    return v;
  }
  if (land_mask) {
    auto idx = land_mask->spec.nearest(c);
    const bool over_land = idx && land_mask->at(idx->first, idx->second) >= 0.5;
    if (over_land) {
      const Field& ws = step.ws10();
      double peak = 0.0;
      for_each_in_radius(ws.spec, c, cfg.criteria_radius_km, [&](std::size_t j, std::size_t i, double) {
        const std::size_t k = ws.spec.index(j, i);
        if (!ws.is_missing(k)) peak = std::max(peak, ws.values[k]);
      });
      v.peak_wind = peak;
      if (!(peak > cfg.wind10m_threshold)) {
        v.reason = RejectReason::Wind;
        return v;
      }
    }
  }
  if (phase == Phase::Extratropical && cfg.require_thickness_max_when_extratropical) {
    if (local_extrema(step.thickness(), c, cfg.criteria_radius_km, ExtremeMode::Max).empty()) {
      v.reason = RejectReason::Thickness;
      return v;
    }
  }
  v.ok = true;
  return v;
}

GeoPoint extrapolate(GeoPoint prev, GeoPoint last) {
  const double d = haversine_km(prev, last);
  if (d < 1e-9) return last;
  const double back = azimuth_deg(last, prev);
  return destination(last, std::fmod(back + 180.0, 360.0), d);
}

}  // namespace

Wind steering_wind(GeoPoint center, const FieldSet& fields, const TrackerConfig& cfg) {
  Wind w;
  for (const auto& lvl : cfg.steering) {
    const Field* u = fields.find(Variable::U, lvl.level);
    const Field* v = fields.find(Variable::V, lvl.level);
    if (!u || !v)
      throw Error(Errc::MissingSteeringFields, "u/v at " + to_string(lvl.level) + " hPa (" +
                                                   format_time(fields.valid_time()) + ")");
    double su = 0.0, sv = 0.0;
    std::size_t n = 0;
    for_each_in_radius(u->spec, center, cfg.steering_avg_radius_km, [&](std::size_t j, std::size_t i, double) {
      const std::size_t k = u->spec.index(j, i);
      if (u->is_missing(k) || v->is_missing(k)) return;
      su += u->values[k];
      sv += v->values[k];
      ++n;
    });
    if (n == 0) throw Error(Errc::EmptyNeighborhood, "no steering points around the centre");
    w.u += lvl.weight * su / static_cast<double>(n);
    w.v += lvl.weight * sv / static_cast<double>(n);
  }
  return w;
}

GeoPoint advect(GeoPoint center, Wind w, double seconds) {
  const double east_km = w.u * seconds / 1000.0;
  const double north_km = w.v * seconds / 1000.0;
  const double dist = std::hypot(east_km, north_km);
  if (dist == 0.0) return center;
  return destination(center, std::atan2(east_km, north_km) * kRadToDeg, dist);
}

GeoPoint first_guess(std::span<const TrackPoint> history, const FieldSet& fields, const TrackerConfig& cfg) {
  if (history.empty()) throw Error(Errc::InvalidArgument, "first_guess needs at least one history point");
  const GeoPoint last = history.back().center;
  const GeoPoint adv = advect(last, steering_wind(last, fields, cfg), cfg.step_seconds);
  if (history.size() == 1) return adv;
  const GeoPoint ext = extrapolate(history[history.size() - 2].center, last);
  return gc_interpolate(ext, adv, 0.5);
}

std::vector<Candidate> find_candidates(const FieldSet& fields, GeoPoint guess, const TrackerConfig& cfg) {
  StepCache step(fields, cfg);
  return candidates_from(step, guess, cfg);
}

Validation validate_candidate(GeoPoint c, const FieldSet& fields, const Field* land_mask, Phase phase,
                              const TrackerConfig& cfg) {
  StepCache step(fields, cfg);
  return validate_with(step, c, land_mask, phase, cfg);
}

GeoPoint constrain_displacement(double prev_disp_km, GeoPoint proposed, GeoPoint from, const TrackerConfig& cfg,
                                double advection_km) {
  if (prev_disp_km < 0.0) throw Error(Errc::InvalidArgument, "previous displacement must be >= 0");
  const double cap = prev_disp_km > 0.0 ? cfg.max_displacement_factor * prev_disp_km
                                        : std::max(advection_km, cfg.first_step_floor_km);
  const double d = haversine_km(from, proposed);
  if (d <= cap) return proposed;
  return gc_interpolate(from, proposed, cap / d);
}

Track track_member(std::span<const FieldSet> run, const TrackPoint& seed, const TrackerConfig& cfg,
                   const Field* land_mask, const PhaseLookup& phase) {
  cfg.validate();
  if (run.empty()) throw Error(Errc::InvalidArgument, "empty forecast run");
  if (run.front().valid_time() != seed.valid_time)
    throw Error(Errc::TimeMisalignment, "seed time " + format_time(seed.valid_time) + " != run start " +
                                            format_time(run.front().valid_time()));
  const Field& msl0 = run.front().at(Variable::Msl, Level::surface());
  const GridSpec grid = msl0.spec;
  if (!grid.contains(seed.center))
    throw Error(Errc::SeedOutsideDomain, "seed (" + std::to_string(seed.center.lat) + ", " +
                                             std::to_string(seed.center.lon) + ") is outside the grid");

  auto phase_at = [&](Timestamp t) { return phase ? phase(t) : Phase::Tropical; };
  auto intensity = [&](StepCache& step, GeoPoint c, TrackPoint& p) {
    try {
      p.min_msl = neighborhood_extreme(step.msl(), c, cfg.criteria_radius_km, ExtremeMode::Min).value;
      p.max_ws10m = neighborhood_extreme(step.ws10(), c, cfg.criteria_radius_km, ExtremeMode::Max).value;
    } catch (const Error& e) {
      if (e.code() != Errc::EmptyNeighborhood) throw;
    }
  };

  Track track;
  TrackPoint first = seed;
  {
    StepCache step0(run.front(), cfg);
    if (run.front().contains(Variable::U, Level::surface())) intensity(step0, seed.center, first);
  }
  track.points.push_back(first);

  const auto step_len = Seconds{static_cast<long long>(std::llround(cfg.step_seconds))};
  for (std::size_t k = 1; k < run.size(); ++k) {
    if (run[k].valid_time() - run[k - 1].valid_time() != step_len)
      throw Error(Errc::TimeMisalignment, "run step before " + format_time(run[k].valid_time()) +
                                              " differs from the tracker step");
    const auto& pts = track.points;
    const std::size_t nh = std::min<std::size_t>(2, pts.size());
    std::span<const TrackPoint> history(pts.data() + pts.size() - nh, nh);
    const GeoPoint last = history.back().center;

    GeoPoint adv;
    try {
      adv = advect(last, steering_wind(last, run[k - 1], cfg), cfg.step_seconds);
    } catch (const Error& e) {
      if (e.code() == Errc::EmptyNeighborhood) break;
      throw;
    }
    const GeoPoint guess = nh == 1 ? adv : gc_interpolate(extrapolate(history[0].center, last), adv, 0.5);
    if (!grid.contains(guess)) break;

    StepCache step(run[k], cfg);
    const Phase ph = phase_at(run[k].valid_time());
    std::optional<GeoPoint> selected;
    for (const auto& c : candidates_from(step, guess, cfg)) {
      if (validate_with(step, c.where, land_mask, ph, cfg).ok) {
        selected = c.where;
        break;
      }
    }
    if (!selected) break;

    const double prev_disp = nh == 2 ? haversine_km(history[0].center, last) : 0.0;
    TrackPoint p;
    p.valid_time = run[k].valid_time();
    p.center = constrain_displacement(prev_disp, *selected, last, cfg, haversine_km(last, adv));
    p.phase = ph;
    intensity(step, p.center, p);
    track.points.push_back(p);
  }
  return track;
}

std::vector<MemberResult> track_members(std::span<const std::vector<FieldSet>> runs, std::span<const int> member_ids,
                                        const TrackPoint& seed, const TrackerConfig& cfg, const Field* land_mask,
                                        const PhaseLookup& phase, unsigned threads) {
  if (runs.empty()) throw Error(Errc::EmptyInput, "no member runs");
  if (member_ids.size() != runs.size()) throw Error(Errc::InvalidArgument, "member id count != run count");
  std::vector<MemberResult> results(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t m = next++; m < runs.size(); m = next++) {
      results[m].member_id = member_ids[m];
      try {
        Track t = track_member(runs[m], seed, cfg, land_mask, phase);
        t.member_id = member_ids[m];
        results[m].track = std::move(t);
      } catch (const Error& e) {
        results[m].error = e.what();
        results[m].error_code = e.code();
      } catch (const std::exception& e) {
        results[m].error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, runs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

EnsembleTrackSet track_ensemble(std::span<const std::vector<FieldSet>> runs, const std::string& storm_id,
                                const TrackPoint& seed, const TrackerConfig& cfg, const Field* land_mask,
                                const PhaseLookup& phase, unsigned threads) {
  std::vector<int> ids(runs.size());
  for (std::size_t m = 0; m < ids.size(); ++m) ids[m] = static_cast<int>(m);
  auto results = track_members(runs, ids, seed, cfg, land_mask, phase, threads);
  std::vector<Track> members;
  for (auto& r : results) {
    if (!r.track) throw Error(r.error_code, "member " + std::to_string(r.member_id) + ": " + r.error);
    r.track->storm_id = storm_id;
    members.push_back(std::move(*r.track));
  }
  return make_ensemble(storm_id, seed.valid_time, std::move(members));
}

}  // namespace tcv
