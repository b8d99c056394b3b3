#include <cmath>
#include <sstream>

#include "common.hpp"
#include "tcv/error.hpp"
#include "tcv/io.hpp"
#include "tcv/probskill.hpp"

namespace tcv::cli {

namespace {

using detail::num;
using detail::ordered_json;

struct Pool {
  std::vector<double> probs;
  std::vector<std::uint8_t> outcomes;
};

std::string csv_num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

int cmd_skill(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  std::vector<gsf::Manifest> fcst;
  std::vector<std::vector<detail::MemberIndex>> fidx;
  for (const auto& p : cfg.manifests) {
    fcst.push_back(gsf::read_manifest(p));
    if (fcst.back().members.empty()) throw Error(Errc::EmptyInput, p.string() + " lists no members");
    fidx.push_back(detail::index_manifest(fcst.back()));
  }
  const gsf::Manifest truth = gsf::read_manifest(*cfg.truth_manifest);
  if (truth.members.size() != 1) throw Error(Errc::InvalidArgument, "truth manifest must hold exactly one sequence");
  const auto tidx = detail::index_manifest(truth).front();

  const std::size_t m0 = fcst.front().members.size();
  bool uniform_m = true;
  for (const auto& f : fcst) uniform_m = uniform_m && f.members.size() == m0;

  // Thresholds first so InsufficientSample surfaces before any pooling work.
  std::vector<TercileThresholds> thresholds;
  for (const auto& vl : cfg.skill_vars) {
    std::vector<Field> sample;
    for (const auto& [key, path] : tidx)
      if (key.variable == vl.variable && key.level == vl.level) sample.push_back(gsf::read(path));
    try {
      thresholds.push_back(tercile_thresholds(sample));
    } catch (const Error& e) {
      throw Error(e.code(), "skill " + to_string(vl) + " truth climatology: " + e.what());
    }
  }

  const auto leads = cfg.window.leads();
  ordered_json entries = ordered_json::array();
  std::ostringstream roc_csv;
  roc_csv << "variable,level,sense,lead_h,threshold,pofd,pod\n";

  for (std::size_t v = 0; v < cfg.skill_vars.size(); ++v) {
    const VarLevel vl = cfg.skill_vars[v];
    const TercileThresholds& th = thresholds[v];
    std::vector<Pool> upper(leads.size()), lower(leads.size());
    parallel_for(leads.size(), cfg.threads, [&](std::size_t li) {
      for (std::size_t c = 0; c < fcst.size(); ++c) {
        const Timestamp t = fcst[c].init_time + Seconds{static_cast<long long>(leads[li]) * 3600};
        auto tp = tidx.find({vl.variable, vl.level, t});
        if (tp == tidx.end()) continue;
        std::vector<Field> members;
        for (const auto& idx : fidx[c]) {
          auto mp = idx.find({vl.variable, vl.level, t});
          if (mp == idx.end()) break;
          members.push_back(gsf::read(mp->second));
        }
        if (members.size() != fidx[c].size()) continue;
        const Field obs = gsf::read(tp->second);
        for (const auto& f : members)
          if (!(f.spec == obs.spec)) throw Error(Errc::SpecMismatch, "forecast and truth grids differ for " + to_string(vl));
        if (!(obs.spec == th.upper.spec)) throw Error(Errc::SpecMismatch, "truth grids differ over time for " + to_string(vl));

        std::vector<double> vals(members.size());
        for (std::size_t j = 0; j < obs.spec.nlat; ++j)
          for (std::size_t i = 0; i < obs.spec.nlon; ++i) {
            const std::size_t k = obs.spec.index(j, i);
            if (obs.is_missing(k) || th.upper.is_missing(k)) continue;
            if (cfg.region && !cfg.region->contains(obs.spec.point(j, i))) continue;
            bool skip = false;
            for (std::size_t m = 0; m < members.size(); ++m) {
              skip = skip || members[m].is_missing(k);
              vals[m] = members[m].values[k];
            }
            if (skip) continue;
            upper[li].probs.push_back(event_probability(vals, TercileSense::Upper, th.upper.values[k]));
            upper[li].outcomes.push_back(event_occurs(obs.values[k], TercileSense::Upper, th.upper.values[k]));
            lower[li].probs.push_back(event_probability(vals, TercileSense::Lower, th.lower.values[k]));
            lower[li].outcomes.push_back(event_occurs(obs.values[k], TercileSense::Lower, th.lower.values[k]));
          }
      }
    });

    for (TercileSense sense : {TercileSense::Upper, TercileSense::Lower}) {
      const auto& pools = sense == TercileSense::Upper ? upper : lower;
      for (std::size_t li = 0; li < leads.size(); ++li) {
        const Pool& p = pools[li];
        if (p.probs.empty()) continue;
        ordered_json e{{"variable", std::string(tcv::to_string(vl.variable))},
                       {"level", tcv::to_string(vl.level)},
                       {"sense", std::string(tcv::to_string(sense))},
                       {"lead_h", leads[li]},
                       {"n_total", p.probs.size()}};
        std::size_t events = 0;
        for (auto o : p.outcomes) events += o;
        e["n_events"] = events;
        try {
          const RocCurve curve = uniform_m ? roc_curve(p.probs, p.outcomes, static_cast<int>(m0))
                                           : roc_curve(p.probs, p.outcomes);
          const double area = roca(curve);
          e["roca"] = num(area);
          e["rocass"] = num(rocass(area));
          for (std::size_t k = 0; k < curve.points.size(); ++k)
            roc_csv << tcv::to_string(vl.variable) << ',' << tcv::to_string(vl.level) << ',' << tcv::to_string(sense)
                    << ',' << leads[li] << ',' << csv_num(curve.thresholds[k]) << ','
                    << csv_num(curve.points[k].pofd) << ',' << csv_num(curve.points[k].pod) << '\n';
        } catch (const Error& err) {
          if (err.code() != Errc::DegenerateOutcomes) throw;
          e["roca"] = nullptr;
          e["rocass"] = nullptr;
          e["note"] = "all outcomes identical";
        }
        entries.push_back(std::move(e));
      }
    }
  }

  std::vector<fs::path> inputs = cfg.manifests;
  inputs.push_back(*cfg.truth_manifest);
  ordered_json report;
  report["metadata"] = detail::metadata_block();
  report["provenance"] = detail::provenance_block(cfg, inputs);
  report["members"] = m0;
  report["roc_thresholds"] = uniform_m ? "ensemble fractions" : "distinct probabilities";
  report["scores"] = entries;

  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  detail::write_json(out / "skill.json", report);
  io::write_file_atomic(out / "roc_points.csv", roc_csv.str());
  log << "skill: " << entries.size() << " scores\n";
  return kExitOk;
}

}  // namespace tcv::cli
