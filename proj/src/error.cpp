#include "tcv/error.hpp"

namespace tcv {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::CoincidentPoints: return "CoincidentPoints";
    case Errc::SpecMismatch: return "SpecMismatch";
    case Errc::IncompatibleFactor: return "IncompatibleFactor";
    case Errc::DomainMismatch: return "DomainMismatch";
    case Errc::EmptyNeighborhood: return "EmptyNeighborhood";
    case Errc::MissingSteeringFields: return "MissingSteeringFields";
    case Errc::MissingField: return "MissingField";
    case Errc::SeedOutsideDomain: return "SeedOutsideDomain";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::CoincidentObservations: return "CoincidentObservations";
    case Errc::InsufficientSample: return "InsufficientSample";
    case Errc::DegenerateOutcomes: return "DegenerateOutcomes";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::TooFewMembers: return "TooFewMembers";
    case Errc::MissingVariable: return "MissingVariable";
    case Errc::VortexOutsideDomain: return "VortexOutsideDomain";
    case Errc::TrackExitsDomain: return "TrackExitsDomain";
    case Errc::UnmatchedStorm: return "UnmatchedStorm";
    case Errc::TimeMisalignment: return "TimeMisalignment";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace tcv
