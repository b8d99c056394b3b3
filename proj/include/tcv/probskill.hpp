#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tcv/grid.hpp"

namespace tcv {

enum class TercileSense { Upper, Lower };
std::string_view to_string(TercileSense s) noexcept;

/// Linear interpolation between order statistics of an ascending sample
/// (position (n-1)*p).
double quantile_sorted(std::span<const double> sorted, double p);

struct TercileThresholds {
  Field lower;  // 1/3 quantile
  Field upper;  // 2/3 quantile
};

/// Per-grid-point terciles of a sample of fields on one grid. Throws
/// InsufficientSample (< 3 fields) and SpecMismatch.
TercileThresholds tercile_thresholds(std::span<const Field> sample);

struct EventDefinition {
  Variable variable = Variable::Other;
  Level level;
  TercileSense sense = TercileSense::Upper;
  Field threshold;
};

/// Strict exceedance (upper) or strict deceedance (lower); equality is a
/// non-event.
inline bool event_occurs(double value, TercileSense sense, double threshold) noexcept {
  return sense == TercileSense::Upper ? value > threshold : value < threshold;
}

/// Fraction of members for which the event occurs.
double event_probability(std::span<const double> member_values, TercileSense sense, double threshold);

struct RocPoint {
  double pofd;
  double pod;
};

struct RocCurve {
  std::vector<RocPoint> points;   // (0,0) first, (1,1) last, pofd nondecreasing
  std::vector<double> thresholds; // decision threshold of each point: "yes" iff prob >= threshold
};

/// Thresholds at every distinct probability value (plus one above the
/// maximum). Throws DegenerateOutcomes / InvalidArgument.
RocCurve roc_curve(std::span<const double> probs, std::span<const std::uint8_t> outcomes);

/// The M+2 ensemble-fraction thresholds {0, 1/M, ..., 1, 1+eps}.
RocCurve roc_curve(std::span<const double> probs, std::span<const std::uint8_t> outcomes, int members);

/// Trapezoidal area under the curve.
double roca(const RocCurve& curve);

/// 2*(roca - 0.5). Throws OutOfRange outside [0, 1].
double rocass(double roca_value);

}  // namespace tcv
