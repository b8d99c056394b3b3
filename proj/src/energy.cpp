#include "tcv/energy.hpp"

#include <cmath>
#include <string>

#include "tcv/error.hpp"
#include "tcv/kernels.hpp"

namespace tcv {

void MteParams::validate() const {
  if (!(t_ref > 0) || !(c_p > 0) || !(latent_heat > 0) || !(epsilon >= 0))
    throw Error(Errc::InvalidArgument, "MTE constants must be positive (epsilon >= 0)");
}

std::vector<Field> deviations(std::span<const Field> members) {
  if (members.size() < 2) throw Error(Errc::TooFewMembers, "perturbations need >= 2 members");
  const Field& first = members.front();
  for (const auto& m : members)
    if (!(m.spec == first.spec) || m.values.size() != first.values.size())
      throw Error(Errc::SpecMismatch, "members on different grids");
  const auto& k = kernels::active();
  // Mean anchored on the first member: exact for identical members and less
  // cancellation for large offsets such as temperature in K.
  const std::size_t n = first.values.size();
  std::vector<double> mean(n, 0.0), diff(n);
  for (const auto& m : members) {
    k.subtract(m.values, first.values, diff);
    k.accumulate(diff, mean);
  }
  k.scale(mean, 1.0 / static_cast<double>(members.size()), mean);
  k.accumulate(first.values, mean);
  std::vector<Field> out;
  out.reserve(members.size());
  for (const auto& m : members) {
    Field d = m;
    k.subtract(m.values, mean, d.values);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<PerturbationSet> perturbations(std::span<const FieldSet> members, Level level) {
  if (members.size() < 2) throw Error(Errc::TooFewMembers, "perturbations need >= 2 members");
  auto gather = [&](Variable var) {
    std::vector<Field> fs;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const Field* f = members[m].find(var, level);
      if (!f)
        throw Error(Errc::MissingVariable, std::string(to_string(var)) + " at " + to_string(level) + " for member " +
                                               std::to_string(m));
      fs.push_back(*f);
    }
    return deviations(fs);
  };
  auto u = gather(Variable::U), v = gather(Variable::V), t = gather(Variable::T), q = gather(Variable::Q);
  std::vector<PerturbationSet> out(members.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (!(u[m].spec == t[m].spec) || !(u[m].spec == q[m].spec) || !(u[m].spec == v[m].spec))
      throw Error(Errc::SpecMismatch, "u/v/T/q on different grids");
    out[m] = {static_cast<int>(m), level, members[m].valid_time(), std::move(u[m]), std::move(v[m]), std::move(t[m]),
              std::move(q[m])};
  }
  return out;
}

Field mte(const PerturbationSet& p, const MteParams& params) {
  params.validate();
  Field out(p.u.spec, Variable::Mte, p.level, p.valid_time);
  kernels::active().mte(p.u.values, p.v.values, p.t.values, p.q.values,
                        {params.thermal_coef(), params.latent_coef()}, out.values);
  return out;
}

MteTerms mte_terms(const PerturbationSet& p, const MteParams& params) {
  params.validate();
  MteTerms t{Field(p.u.spec, Variable::Mte, p.level, p.valid_time), Field(p.u.spec, Variable::Mte, p.level, p.valid_time),
             Field(p.u.spec, Variable::Mte, p.level, p.valid_time)};
  const double ct = params.thermal_coef(), cq = params.latent_coef();
  for (std::size_t k = 0; k < t.kinetic.values.size(); ++k) {
    t.kinetic.values[k] = 0.5 * (p.u.values[k] * p.u.values[k] + p.v.values[k] * p.v.values[k]);
    t.thermal.values[k] = ct * p.t.values[k] * p.t.values[k];
    t.latent.values[k] = cq * p.q.values[k] * p.q.values[k];
  }
  return t;
}

MteResult mte(std::span<const PerturbationSet> set, const MteParams& params) {
  if (set.empty()) throw Error(Errc::TooFewMembers, "no perturbations");
  MteResult r;
  const auto& k = kernels::active();
  r.mean = Field(set.front().u.spec, Variable::Mte, set.front().level, set.front().valid_time);
  for (const auto& p : set) {
    r.members.push_back(mte(p, params));
    k.accumulate(r.members.back().values, r.mean.values);
  }
  k.scale(r.mean.values, 1.0 / static_cast<double>(set.size()), r.mean.values);
  return r;
}

bool Region::contains(GeoPoint p) const noexcept {
  if (p.lat < lat_min || p.lat > lat_max) return false;
  const double lo = normalize_lon(lon_min), hi = normalize_lon(lon_max), x = normalize_lon(p.lon);
  if (lon_max - lon_min >= 360.0) return true;
  return lo <= hi ? (x >= lo && x <= hi) : (x >= lo || x <= hi);
}

double area_mean(const Field& f, const std::optional<Region>& region) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < f.spec.nlat; ++j) {
    const double w = std::cos(f.spec.lat(j) * kDegToRad);
    for (std::size_t i = 0; i < f.spec.nlon; ++i) {
      const std::size_t k = f.spec.index(j, i);
      if (f.is_missing(k)) continue;
      if (region && !region->contains(f.spec.point(j, i))) continue;
      num += w * f.values[k];
      den += w;
    }
  }
  if (!(den > 0)) throw Error(Errc::EmptyInput, "area mean over an empty region");
  return num / den;
}

}  // namespace tcv
