#include "pcurve/error.hpp"

#include <sstream>

namespace pcurve {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularAngles: return "SingularAngles";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonOrthogonal: return "NonOrthogonal";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::SliceHitsBase: return "SliceHitsBase";
    case ErrorCode::EmptySection: return "EmptySection";
    case ErrorCode::UnboundedSection: return "UnboundedSection";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::MissingTruncation: return "MissingTruncation";
    case ErrorCode::DegenerateInterval: return "DegenerateInterval";
    case ErrorCode::InvertedBounds: return "InvertedBounds";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::JacobianSignViolation: return "JacobianSignViolation";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::InadmissibleStart: return "InadmissibleStart";
    case ErrorCode::NonOrthogonalRotation: return "NonOrthogonalRotation";
    case ErrorCode::ZeroPitch: return "ZeroPitch";
    case ErrorCode::OutOfRegime: return "OutOfRegime";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::IncompatibleTruncation: return "IncompatibleTruncation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message,
                    std::optional<double> s) {
  std::ostringstream os;
  os << to_string(code) << ": " << message;
  if (s) os << " (at s=" << *s << ")";
  return os.str();
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<double> arclength)
    : std::runtime_error(compose(code, message, arclength)),
      code_(code),
      detail_(message),
      arclength_(arclength) {}

}  // namespace pcurve
