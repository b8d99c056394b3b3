#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcv/grid.hpp"
#include "tcv/track.hpp"

namespace tcv {

struct PositionPair {
  GeoPoint mean;
  GeoPoint observed;
};

/// RMS over cases of the great-circle distance between ensemble-mean and
/// observed positions at one lead time. Throws EmptyInput.
double error_tc(std::span<const PositionPair> cases);

struct LeadEnsemble {
  GeoPoint mean;
  std::vector<GeoPoint> members;  // members alive at this lead
};

/// sqrt(mean over cases of mean over members of d(member, mean)^2).
/// Throws EmptyInput (also for a case without members).
double spread_tc(std::span<const LeadEnsemble> cases);

/// Sum of per-lead values. Throws EmptyInput.
double acc_error(std::span<const double> per_lead_error_km);
double acc_spread(std::span<const double> per_lead_spread_km);

struct AlongCross {
  double at_km;   // > 0 ahead of the observed motion
  double ct_km;   // > 0 right of the observed motion
  double dpe_km;  // direct position error
};

/// Decomposes the ob2 -> fc error relative to the observed heading ob1 -> ob2
/// using the azimuth difference. Throws CoincidentObservations.
AlongCross along_cross(GeoPoint ob1, GeoPoint ob2, GeoPoint fc);

struct StrikeProbabilityField {
  Field prob;  // percent
  double impact_radius_km = 111.0;
  std::vector<std::string> storm_ids;
};

/// Percentage of members whose track polyline (great-circle segments between
/// consecutive points) passes within radius_km of each grid point.
StrikeProbabilityField strike_probability(const EnsembleTrackSet& tracks, const GridSpec& grid,
                                          double radius_km = 111.0);

/// Pointwise maximum. Throws SpecMismatch / EmptyInput.
StrikeProbabilityField merge_strike(std::span<const StrikeProbabilityField> fields);

enum class PMethod { Auto, Exact, Normal };

struct MannWhitney {
  double u_a = 0;  // pairs with a > b, ties counted 1/2
  double u_b = 0;
  double u = 0;    // min(u_a, u_b)
  double p = 1;    // two-sided
  bool exact = false;
};

/// Two-sided Mann-Whitney U. Auto: exact null distribution when n_a+n_b <= 16
/// and there are no ties, else the tie-corrected normal approximation with
/// continuity correction. Throws EmptyInput.
MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b, PMethod method = PMethod::Auto);

/// P(U <= u) under the no-ties null for sample sizes (n_a, n_b).
double mann_whitney_exact_cdf(std::size_t n_a, std::size_t n_b, double u);

// ---------------------------------------------------------------------------
// Case pooling for reports.

struct LeadWindow {
  int start_h = 6;
  int end_h = 120;
  int step_h = 6;

  /// Throws InvalidArgument unless every bound is a multiple of 6 h.
  void validate() const;
  std::vector<int> leads() const;
};

struct TrackErrorSample {
  std::string storm_id;
  Timestamp init_time{};
  int lead_h = 0;
  double error_km = 0;   // distance ensemble mean -> observation
  double spread_km = 0;  // RMS member -> mean distance for this case
  std::optional<double> at_km;
  std::optional<double> ct_km;
  double dpe_km = 0;
  std::size_t n_members = 0;
};

struct SampleStats {
  std::size_t n = 0;
  double mean = 0, std = 0, median = 0, min = 0, max = 0, mean_abs = 0;
};
SampleStats describe(std::vector<double> values);

struct LeadSummary {
  int lead_h = 0;
  std::size_t n_cases = 0;
  double error_km = 0;
  double spread_km = 0;
  SampleStats at;
  SampleStats ct;
};

struct VerificationResult {
  std::vector<TrackErrorSample> samples;
  std::vector<LeadSummary> leads;  // only leads with >= 1 case
  double acc_error_km = 0;
  double acc_spread_km = 0;
};

/// Pairs each forecast (storm, init) with the observed track of the same storm.
/// Throws UnmatchedStorm when no observation exists, TimeMisalignment when the
/// init or a forecast time is off the observed 6 h grid.
VerificationResult verify_cases(std::span<const EnsembleTrackSet> cases, std::span<const Track> observed,
                                const LeadWindow& window);

}  // namespace tcv
