#include "tcv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tcv/error.hpp"
#include "tcv/gridops.hpp"
#include "tcv/kernels.hpp"

namespace tcv {

double error_tc(std::span<const PositionPair> cases) {
  if (cases.empty()) throw Error(Errc::EmptyInput, "error_tc needs at least one case");
  double sum = 0.0;
  for (const auto& c : cases) {
    const double d = haversine_km(c.mean, c.observed);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(cases.size()));
}

double spread_tc(std::span<const LeadEnsemble> cases) {
  if (cases.empty()) throw Error(Errc::EmptyInput, "spread_tc needs at least one case");
  double sum = 0.0;
  for (const auto& c : cases) {
    if (c.members.empty()) throw Error(Errc::EmptyInput, "spread_tc case without members");
    double s = 0.0;
    for (const auto& m : c.members) {
      const double d = haversine_km(m, c.mean);
      s += d * d;
    }
    sum += s / static_cast<double>(c.members.size());
  }
  return std::sqrt(sum / static_cast<double>(cases.size()));
}

namespace {
double sum_leads(std::span<const double> v, const char* what) {
  if (v.empty()) throw Error(Errc::EmptyInput, std::string(what) + " over an empty lead set");
  return std::accumulate(v.begin(), v.end(), 0.0);
}
}  // namespace

double acc_error(std::span<const double> per_lead) { return sum_leads(per_lead, "acc_error"); }
double acc_spread(std::span<const double> per_lead) { return sum_leads(per_lead, "acc_spread"); }

AlongCross along_cross(GeoPoint ob1, GeoPoint ob2, GeoPoint fc) {
  // Observed motion direction as seen at ob2 (final bearing of ob1 -> ob2).
  double heading;
  try {
    heading = azimuth_deg(ob2, ob1) + 180.0;
  } catch (const Error& e) {
    if (e.code() == Errc::CoincidentPoints) throw Error(Errc::CoincidentObservations, "ob1 and ob2 coincide");
    throw;
  }
  const double dpe = haversine_km(ob2, fc);
  if (dpe == 0.0) return {0.0, 0.0, 0.0};
  double to_fc;
  try {
    to_fc = azimuth_deg(ob2, fc);
  } catch (const Error& e) {
    if (e.code() == Errc::CoincidentPoints) return {0.0, 0.0, dpe};
    throw;
  }
  const double delta = (to_fc - heading) * kDegToRad;
  return {dpe * std::cos(delta), dpe * std::sin(delta), dpe};
}

StrikeProbabilityField strike_probability(const EnsembleTrackSet& tracks, const GridSpec& grid, double radius_km) {
  grid.validate();
  if (tracks.members.empty()) throw Error(Errc::EmptyInput, "strike probability needs at least one member");
  if (!(radius_km > 0.0)) throw Error(Errc::InvalidArgument, "impact radius must be positive");
  std::vector<std::uint32_t> count(grid.size(), 0);
  std::vector<std::uint8_t> hit(grid.size());

  for (const auto& member : tracks.members) {
    std::fill(hit.begin(), hit.end(), 0);
    const auto& pts = member.points;
    auto visit = [&](GeoPoint a, GeoPoint b) {
      const double half = 0.5 * haversine_km(a, b);
      const GeoPoint mid = gc_interpolate(a, b, 0.5);
      for_each_in_radius(grid, mid, radius_km + half + 1e-6, [&](std::size_t j, std::size_t i, double) {
        const std::size_t k = grid.index(j, i);
        if (!hit[k] && point_segment_km(grid.point(j, i), a, b) <= radius_km) hit[k] = 1;
      });
    };
    if (pts.size() == 1) visit(pts[0].center, pts[0].center);
    for (std::size_t s = 1; s < pts.size(); ++s) visit(pts[s - 1].center, pts[s].center);
    for (std::size_t k = 0; k < count.size(); ++k) count[k] += hit[k];
  }

  StrikeProbabilityField out;
  out.prob = Field(grid, Variable::Strike, Level::surface(), tracks.init_time);
  const double m = static_cast<double>(tracks.members.size());
  for (std::size_t k = 0; k < count.size(); ++k) out.prob.values[k] = static_cast<double>(count[k]) * 100.0 / m;
  out.impact_radius_km = radius_km;
  out.storm_ids = {tracks.storm_id};
  return out;
}

StrikeProbabilityField merge_strike(std::span<const StrikeProbabilityField> fields) {
  if (fields.empty()) throw Error(Errc::EmptyInput, "merge_strike needs at least one field");
  StrikeProbabilityField out = fields.front();
  const auto& k = kernels::active();
  for (std::size_t n = 1; n < fields.size(); ++n) {
    if (!(fields[n].prob.spec == out.prob.spec)) throw Error(Errc::SpecMismatch, "strike fields on different grids");
    k.max_inplace(fields[n].prob.values, out.prob.values);
    for (const auto& id : fields[n].storm_ids)
      if (std::find(out.storm_ids.begin(), out.storm_ids.end(), id) == out.storm_ids.end())
        out.storm_ids.push_back(id);
  }
  return out;
}

double mann_whitney_exact_cdf(std::size_t n_a, std::size_t n_b, double u) {
  if (u < 0) return 0.0;
  const std::size_t umax = n_a * n_b;
  // ways[i][j][k]: arrangements of i a's and j b's with U_a == k. Built with
  // the recursion on whether the largest element belongs to a or b.
  std::vector<std::vector<std::vector<double>>> ways(
      n_a + 1, std::vector<std::vector<double>>(n_b + 1, std::vector<double>(umax + 1, 0.0)));
  for (std::size_t i = 0; i <= n_a; ++i)
    for (std::size_t j = 0; j <= n_b; ++j) {
      if (i == 0 || j == 0) {
        ways[i][j][0] = 1.0;
        continue;
      }
      for (std::size_t k = 0; k <= i * j; ++k) {
        double w = ways[i][j - 1][k];            // largest is a b: adds nothing
        if (k >= j) w += ways[i - 1][j][k - j];  // largest is an a: beats all j b's
        ways[i][j][k] = w;
      }
    }
  const auto& dist = ways[n_a][n_b];
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  double cum = 0.0;
  for (std::size_t k = 0; k <= umax && static_cast<double>(k) <= u + 1e-9; ++k) cum += dist[k];
  return cum / total;
}

MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b, PMethod method) {
  if (a.empty() || b.empty()) throw Error(Errc::EmptyInput, "mann_whitney_u needs two non-empty samples");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double x : a) pooled.emplace_back(x, 0);
  for (double x : b) pooled.emplace_back(x, 1);
  std::sort(pooled.begin(), pooled.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  double rank_sum_a = 0.0, tie_term = 0.0;
  bool ties = false;
  for (std::size_t s = 0; s < n;) {
    std::size_t e = s;
    while (e + 1 < n && pooled[e + 1].first == pooled[s].first) ++e;
    const double midrank = 0.5 * static_cast<double>(s + e) + 1.0;
    const auto t = static_cast<double>(e - s + 1);
    if (t > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    for (std::size_t k = s; k <= e; ++k)
      if (pooled[k].second == 0) rank_sum_a += midrank;
    s = e + 1;
  }

  MannWhitney r;
  const double dna = static_cast<double>(na), dnb = static_cast<double>(nb), dn = static_cast<double>(n);
  r.u_a = rank_sum_a - dna * (dna + 1.0) / 2.0;
  r.u_b = dna * dnb - r.u_a;
  r.u = std::min(r.u_a, r.u_b);

  const bool use_exact = method == PMethod::Exact || (method == PMethod::Auto && n <= 16 && !ties);
  if (use_exact) {
    if (ties) throw Error(Errc::InvalidArgument, "exact Mann-Whitney p requires untied samples");
    r.exact = true;
    r.p = std::min(1.0, 2.0 * mann_whitney_exact_cdf(na, nb, r.u));
    return r;
  }
  const double mean = dna * dnb / 2.0;
  const double var = dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(var > 0.0)) {
    r.p = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.u_a - mean) - 0.5) / std::sqrt(var);
  r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

void LeadWindow::validate() const {
  if (start_h < 0 || end_h < start_h || step_h <= 0 || start_h % 6 || end_h % 6 || step_h % 6)
    throw Error(Errc::InvalidArgument, "lead window must be non-negative multiples of 6 h with start <= end");
}

std::vector<int> LeadWindow::leads() const {
  std::vector<int> out;
  for (int h = start_h; h <= end_h; h += step_h) out.push_back(h);
  return out;
}

SampleStats describe(std::vector<double> v) {
  SampleStats s;
  s.n = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  s.min = v.front();
  s.max = v.back();
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  s.median = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  double ss = 0.0, sa = 0.0;
  for (double x : v) {
    ss += (x - s.mean) * (x - s.mean);
    sa += std::abs(x);
  }
  s.std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.mean_abs = sa / n;
  return s;
}

VerificationResult verify_cases(std::span<const EnsembleTrackSet> cases, std::span<const Track> observed,
                                const LeadWindow& window) {
  window.validate();
  std::map<std::string, const Track*> obs_by_storm;
  for (const auto& t : observed) obs_by_storm[t.storm_id] = &t;

  VerificationResult out;
  for (const auto& c : cases) {
    auto it = obs_by_storm.find(c.storm_id);
    if (it == obs_by_storm.end() || it->second->empty())
      throw Error(Errc::UnmatchedStorm, "no observed track for storm '" + c.storm_id + "'");
    const Track& obs = *it->second;
    if (!obs.at_time(c.init_time))
      throw Error(Errc::TimeMisalignment, c.storm_id + ": init " + format_time(c.init_time) +
                                              " is not an observed time");
    for (const auto& m : c.members)
      for (const auto& p : m.points)
        if ((p.valid_time - c.init_time) % kSixHours != Seconds{0} || p.valid_time < c.init_time)
          throw Error(Errc::TimeMisalignment, c.storm_id + ": forecast time " + format_time(p.valid_time) +
                                                  " is off the 6 h grid");

    for (int lead : window.leads()) {
      const Timestamp t = c.init_time + Seconds{static_cast<long long>(lead) * 3600};
      const TrackPoint* ob = obs.at_time(t);
      const TrackPoint* mean = c.mean_track.at_time(t);
      if (!ob || !mean) continue;
      TrackErrorSample s;
      s.storm_id = c.storm_id;
      s.init_time = c.init_time;
      s.lead_h = lead;
      s.error_km = haversine_km(mean->center, ob->center);
      double ss = 0.0;
      for (const auto& m : c.members)
        if (const TrackPoint* p = m.at_time(t)) {
          const double d = haversine_km(p->center, mean->center);
          ss += d * d;
          ++s.n_members;
        }
      if (s.n_members == 0) continue;
      s.spread_km = std::sqrt(ss / static_cast<double>(s.n_members));
      s.dpe_km = s.error_km;
      if (const TrackPoint* prev = obs.at_time(t - kSixHours)) {
        try {
          const AlongCross ac = along_cross(prev->center, ob->center, mean->center);
          s.at_km = ac.at_km;
          s.ct_km = ac.ct_km;
        } catch (const Error& e) {
          if (e.code() != Errc::CoincidentObservations) throw;
        }
      }
      out.samples.push_back(std::move(s));
    }
  }

  std::vector<double> err_leads, spr_leads;
  for (int lead : window.leads()) {
    double e2 = 0.0, s2 = 0.0;
    std::vector<double> at, ct;
    std::size_t n = 0;
    for (const auto& s : out.samples) {
      if (s.lead_h != lead) continue;
      e2 += s.error_km * s.error_km;
      s2 += s.spread_km * s.spread_km;
      if (s.at_km) at.push_back(*s.at_km);
      if (s.ct_km) ct.push_back(*s.ct_km);
      ++n;
    }
    if (n == 0) continue;
    LeadSummary ls;
    ls.lead_h = lead;
    ls.n_cases = n;
    ls.error_km = std::sqrt(e2 / static_cast<double>(n));
    ls.spread_km = std::sqrt(s2 / static_cast<double>(n));
    ls.at = describe(at);
    ls.ct = describe(ct);
    err_leads.push_back(ls.error_km);
    spr_leads.push_back(ls.spread_km);
    out.leads.push_back(ls);
  }
  if (!err_leads.empty()) {
    out.acc_error_km = acc_error(err_leads);
    out.acc_spread_km = acc_spread(spr_leads);
  }
  return out;
}

}  // namespace tcv
