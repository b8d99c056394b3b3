#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tcv/energy.hpp"

using namespace tcv;
using testing::error_code_of;
using testing::rel_close;

namespace {

const GridSpec kG{10, 140, 1, 1, 5, 6, false};
const Level k850{850};

FieldSet member_set(double u, double v, double t, double q) {
  FieldSet s;
  s.insert(Field(kG, Variable::U, k850, {}, u));
  s.insert(Field(kG, Variable::V, k850, {}, v));
  s.insert(Field(kG, Variable::T, k850, {}, t));
  s.insert(Field(kG, Variable::Q, k850, {}, q));
  return s;
}

FieldSet random_set(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  FieldSet s;
  for (auto [var, base, scale] : {std::tuple{Variable::U, 5.0, 3.0}, std::tuple{Variable::V, -2.0, 3.0},
                                   std::tuple{Variable::T, 285.0, 1.5}, std::tuple{Variable::Q, 0.012, 0.002}}) {
    Field f(kG, var, k850, {});
    for (auto& x : f.values) x = base + scale * n(rng);
    s.insert(f);
  }
  return s;
}

// Single-member perturbation with constant u', v', T', q'.
PerturbationSet constant_perturbation(double u, double v, double t, double q) {
  PerturbationSet p;
  p.level = k850;
  p.u = Field(kG, Variable::U, k850, {}, u);
  p.v = Field(kG, Variable::V, k850, {}, v);
  p.t = Field(kG, Variable::T, k850, {}, t);
  p.q = Field(kG, Variable::Q, k850, {}, q);
  return p;
}

double mte_at(double u, double v, double t, double q, const MteParams& prm = {}) {
  return mte(constant_perturbation(u, v, t, q), prm).values[0];
}

}  // namespace

TEST_CASE("parameters") {
  const MteParams p;
  CHECK(p.t_ref == 270.0);
  CHECK(p.c_p == 1005.7);
  CHECK(p.latent_heat == 2.51e6);
  CHECK(p.epsilon == 1.0);
  p.validate();
  CHECK(error_code_of([] { MteParams{0.0}.validate(); }) == Errc::InvalidArgument);
  CHECK(error_code_of([] { MteParams{270, 1005.7, 2.51e6, -1.0}.validate(); }) == Errc::InvalidArgument);
}

TEST_CASE("MTE reference values") {
  CHECK(mte_at(0, 0, 0, 0) == 0.0);
  CHECK(mte_at(1, 0, 0, 0) == doctest::Approx(0.5));
  CHECK(mte_at(0, 1, 0, 0) == doctest::Approx(0.5));
  CHECK(mte_at(0, 0, 1, 0) == doctest::Approx(3.7248).epsilon(1e-4));
  CHECK(mte_at(0, 0, 0, 1e-3) == doctest::Approx(23.20).epsilon(1e-3));
  MteParams dry;
  dry.epsilon = 0.0;
  CHECK(mte_at(0, 0, 0, 1e-3, dry) == 0.0);
  // Independent arithmetic on the constants.
  const double expect = 0.5 * (4.0 + 9.0) + 1005.7 / 270.0 * 0.25 + 2.51e6 * 2.51e6 / (1005.7 * 270.0) * 4e-6;
  CHECK(mte_at(2, -3, 0.5, -2e-3) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("perturbations") {
  SUBCASE("identical members") {
    const std::vector<FieldSet> m{member_set(3, 4, 280, 0.01), member_set(3, 4, 280, 0.01), member_set(3, 4, 280, 0.01)};
    const auto p = perturbations(m, k850);
    REQUIRE(p.size() == 3);
    for (const auto& x : p) {
      for (const Field* f : {&x.u, &x.v, &x.t, &x.q})
        for (double v : f->values) CHECK(v == 0.0);
      for (double v : mte(x, {}).values) CHECK(v == 0.0);
    }
  }
  SUBCASE("symmetric pair") {
    const std::vector<FieldSet> m{member_set(2, -1, 1.5, 1e-3), member_set(-2, 1, -1.5, -1e-3)};
    const auto p = perturbations(m, k850);
    CHECK(p[0].u.values[0] == 2.0);
    CHECK(p[1].u.values[0] == -2.0);
    CHECK(p[0].t.values[3] == 1.5);
    CHECK(p[1].q.values[5] == -1e-3);
    CHECK(p[0].member_id == 0);
    CHECK(p[1].member_id == 1);
    CHECK(p[0].level == k850);
  }
  SUBCASE("random members sum to zero") {
    std::mt19937_64 rng(11);
    std::vector<FieldSet> m;
    for (int k = 0; k < 5; ++k) m.push_back(random_set(rng));
    const auto p = perturbations(m, k850);
    for (std::size_t i = 0; i < kG.size(); ++i) {
      double su = 0, st = 0, sq = 0;
      for (const auto& x : p) {
        su += x.u.values[i];
        st += x.t.values[i];
        sq += x.q.values[i];
      }
      CHECK(std::abs(su / 5) < 1e-10 * 10.0);
      CHECK(std::abs(st / 5) < 1e-10 * 300.0);
      CHECK(std::abs(sq / 5) < 1e-10 * 0.02);
      // Direct mean subtraction as an oracle.
      double mean_u = 0;
      for (const auto& s : m) mean_u += s.at(Variable::U, k850).values[i];
      mean_u /= 5;
      CHECK(p[2].u.values[i] == doctest::Approx(m[2].at(Variable::U, k850).values[i] - mean_u).epsilon(1e-12));
    }
  }
  SUBCASE("errors") {
    const std::vector<FieldSet> one{member_set(1, 1, 1, 1)};
    CHECK(error_code_of([&] { perturbations(one, k850); }) == Errc::TooFewMembers);
    std::vector<FieldSet> gap{member_set(1, 1, 1, 1), member_set(1, 1, 1, 1)};
    FieldSet partial;
    partial.insert(Field(kG, Variable::U, k850, {}, 1));
    gap[1] = partial;
    CHECK(error_code_of([&] { perturbations(gap, k850); }) == Errc::MissingVariable);
    CHECK(error_code_of([&] { perturbations(std::vector<FieldSet>{member_set(1, 1, 1, 1), member_set(1, 1, 1, 1)}, Level{500}); }) ==
          Errc::MissingVariable);
    std::vector<FieldSet> mis{member_set(1, 1, 1, 1), member_set(1, 1, 1, 1)};
    mis[1].insert(Field(GridSpec{10, 140, 1, 1, 5, 7, false}, Variable::T, k850, {}, 1));
    CHECK(error_code_of([&] { perturbations(mis, k850); }) == Errc::SpecMismatch);
  }
}

TEST_CASE("MTE properties") {
  std::mt19937_64 rng(12);
  std::vector<FieldSet> m;
  for (int k = 0; k < 6; ++k) m.push_back(random_set(rng));
  const auto p = perturbations(m, k850);
  const MteParams prm;
  const MteResult r = mte(p, prm);
  REQUIRE(r.members.size() == 6);

  SUBCASE("non-negative and mean over members") {
    for (std::size_t i = 0; i < kG.size(); ++i) {
      double s = 0;
      for (const auto& f : r.members) {
        CHECK(f.values[i] >= 0.0);
        s += f.values[i];
      }
      CHECK(r.mean.values[i] == doctest::Approx(s / 6).epsilon(1e-12));
    }
    CHECK(r.mean.variable == Variable::Mte);
  }
  SUBCASE("common temperature offset") {
    std::vector<FieldSet> warm = m;
    for (auto& s : warm) {
      Field t = s.at(Variable::T, k850);
      for (auto& x : t.values) x += 7.25;
      s.insert(t);
    }
    const MteResult w = mte(perturbations(warm, k850), prm);
    for (std::size_t i = 0; i < kG.size(); ++i) CHECK(rel_close(w.mean.values[i], r.mean.values[i], 1e-9));
  }
  SUBCASE("term additivity and kinetic scaling") {
    for (const auto& x : p) {
      const MteTerms t = mte_terms(x, prm);
      const Field fused = mte(x, prm);
      PerturbationSet doubled = x;
      for (auto& v : doubled.u.values) v *= 2;
      for (auto& v : doubled.v.values) v *= 2;
      const MteTerms t2 = mte_terms(doubled, prm);
      for (std::size_t i = 0; i < kG.size(); ++i) {
        CHECK(rel_close(t.kinetic.values[i] + t.thermal.values[i] + t.latent.values[i], fused.values[i], 1e-12));
        CHECK(t2.kinetic.values[i] == 4.0 * t.kinetic.values[i]);
        CHECK(t2.thermal.values[i] == t.thermal.values[i]);
      }
    }
  }
}

TEST_CASE("moisture patch only affects the latent term") {
  std::vector<FieldSet> m{member_set(1, 1, 280, 0.01), member_set(1, 1, 280, 0.01)};
  Field q = m[0].at(Variable::Q, k850);
  q.at(2, 3) += 2e-3;
  m[0].insert(q);
  const MteResult r = mte(perturbations(m, k850), {});
  for (std::size_t j = 0; j < kG.nlat; ++j)
    for (std::size_t i = 0; i < kG.nlon; ++i) {
      if (j == 2 && i == 3) CHECK(r.mean.at(j, i) == doctest::Approx(23.20).epsilon(1e-3));  // q' = +-1e-3
      else CHECK(r.mean.at(j, i) == 0.0);
    }
}

TEST_CASE("region and area mean") {
  const Region box{0, 20, 170, -170};  // crosses the dateline
  CHECK(box.contains({10, 175}));
  CHECK(box.contains({10, -175}));
  CHECK_FALSE(box.contains({10, 0}));
  CHECK_FALSE(box.contains({30, 175}));

  Field f(kG, Variable::Mte, k850, {}, 3.0);
  CHECK(area_mean(f) == doctest::Approx(3.0));
  // Weighted by cos(lat): one row set to 1, the rest 0.
  for (std::size_t j = 0; j < kG.nlat; ++j)
    for (std::size_t i = 0; i < kG.nlon; ++i) f.at(j, i) = j == 0 ? 1.0 : 0.0;
  double wsum = 0;
  for (std::size_t j = 0; j < kG.nlat; ++j) wsum += std::cos((10.0 + j) * kPi / 180.0);
  CHECK(area_mean(f) == doctest::Approx(std::cos(10.0 * kPi / 180.0) / wsum).epsilon(1e-12));
  CHECK(area_mean(f, Region{9.5, 10.5, 0, 180}) == doctest::Approx(1.0));
  CHECK(error_code_of([&] { area_mean(f, Region{-50, -40, 0, 10}); }) == Errc::EmptyInput);
}
