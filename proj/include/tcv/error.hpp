#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcv {

enum class Errc {
  InvalidArgument,
  CoincidentPoints,
  SpecMismatch,
  IncompatibleFactor,
  DomainMismatch,
  EmptyNeighborhood,
  MissingSteeringFields,
  MissingField,
  SeedOutsideDomain,
  EmptyInput,
  CoincidentObservations,
  InsufficientSample,
  DegenerateOutcomes,
  OutOfRange,
  TooFewMembers,
  MissingVariable,
  VortexOutsideDomain,
  TrackExitsDomain,
  UnmatchedStorm,
  TimeMisalignment,
  Io,
  Parse,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc codes so
/// callers (and the CLI exit-code mapping) can branch on kind, not text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tcv
