#include "tcv/probskill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tcv/error.hpp"

namespace tcv {

std::string_view to_string(TercileSense s) noexcept { return s == TercileSense::Upper ? "upper" : "lower"; }

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(Errc::InsufficientSample, "quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

TercileThresholds tercile_thresholds(std::span<const Field> sample) {
  if (sample.size() < 3)
    throw Error(Errc::InsufficientSample, "tercile thresholds need >= 3 fields, got " + std::to_string(sample.size()));
  const Field& first = sample.front();
  for (const auto& f : sample)
    if (!(f.spec == first.spec)) throw Error(Errc::SpecMismatch, "tercile sample fields on different grids");
  TercileThresholds out{Field(first.spec, first.variable, first.level, first.valid_time),
                        Field(first.spec, first.variable, first.level, first.valid_time)};
  std::vector<double> col;
  col.reserve(sample.size());
  bool masked = false;
  for (std::size_t k = 0; k < first.values.size(); ++k) {
    col.clear();
    for (const auto& f : sample)
      if (!f.is_missing(k)) col.push_back(f.values[k]);
    if (col.size() < 3) {
      if (!masked) {
        out.lower.missing.assign(first.values.size(), 0);
        out.upper.missing.assign(first.values.size(), 0);
        masked = true;
      }
      out.lower.missing[k] = out.upper.missing[k] = 1;
      out.lower.values[k] = out.upper.values[k] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::sort(col.begin(), col.end());
    out.lower.values[k] = quantile_sorted(col, 1.0 / 3.0);
    out.upper.values[k] = quantile_sorted(col, 2.0 / 3.0);
  }
  return out;
}

double event_probability(std::span<const double> member_values, TercileSense sense, double threshold) {
  if (member_values.empty()) throw Error(Errc::EmptyInput, "event probability needs at least one member");
  std::size_t n = 0;
  for (double v : member_values) n += event_occurs(v, sense, threshold) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(member_values.size());
}

namespace {

RocCurve sweep(std::span<const double> probs, std::span<const std::uint8_t> outcomes, std::vector<double> thresholds) {
  if (probs.size() != outcomes.size() || probs.empty())
    throw Error(Errc::InvalidArgument, "roc_curve needs equal-length, non-empty inputs");
  const auto events = static_cast<std::size_t>(std::count_if(outcomes.begin(), outcomes.end(), [](auto o) { return o != 0; }));
  const std::size_t nonevents = outcomes.size() - events;
  if (events == 0 || nonevents == 0)
    throw Error(Errc::DegenerateOutcomes, "roc_curve needs at least one event and one non-event");

  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return probs[x] > probs[y]; });
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());

  RocCurve c;
  std::size_t hits = 0, false_alarms = 0, pos = 0;
  for (double th : thresholds) {
    while (pos < order.size() && probs[order[pos]] >= th) {
      if (outcomes[order[pos]]) ++hits;
      else ++false_alarms;
      ++pos;
    }
    c.points.push_back({static_cast<double>(false_alarms) / static_cast<double>(nonevents),
                        static_cast<double>(hits) / static_cast<double>(events)});
    c.thresholds.push_back(th);
  }
  if (c.points.front().pofd != 0.0 || c.points.front().pod != 0.0) {
    c.points.insert(c.points.begin(), {0.0, 0.0});
    c.thresholds.insert(c.thresholds.begin(), std::numeric_limits<double>::infinity());
  }
  if (c.points.back().pofd != 1.0 || c.points.back().pod != 1.0) {
    c.points.push_back({1.0, 1.0});
    c.thresholds.push_back(-std::numeric_limits<double>::infinity());
  }
  return c;
}

}  // namespace

RocCurve roc_curve(std::span<const double> probs, std::span<const std::uint8_t> outcomes) {
  std::vector<double> th(probs.begin(), probs.end());
  std::sort(th.begin(), th.end());
  th.erase(std::unique(th.begin(), th.end()), th.end());
  if (!th.empty()) th.push_back(std::nextafter(th.back(), std::numeric_limits<double>::infinity()));
  return sweep(probs, outcomes, std::move(th));
}

RocCurve roc_curve(std::span<const double> probs, std::span<const std::uint8_t> outcomes, int members) {
  if (members < 1) throw Error(Errc::InvalidArgument, "ensemble size must be >= 1");
  std::vector<double> th;
  th.reserve(static_cast<std::size_t>(members) + 2);
  for (int k = 0; k <= members; ++k) th.push_back(static_cast<double>(k) / static_cast<double>(members));
  th.push_back(1.0 + 1e-9);
  return sweep(probs, outcomes, std::move(th));
}

double roca(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    area += (b.pofd - a.pofd) * 0.5 * (a.pod + b.pod);
  }
  return area;
}

double rocass(double roca_value) {
  if (!(roca_value >= 0.0 && roca_value <= 1.0))
    throw Error(Errc::OutOfRange, "ROCA must lie in [0, 1], got " + std::to_string(roca_value));
  return 2.0 * (roca_value - 0.5);
}

}  // namespace tcv
