#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pcurve {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  SingularAngles,
  ZeroVector,
  NonOrthogonal,
  OutOfDomain,
  SliceHitsBase,
  EmptySection,
  UnboundedSection,
  UnsupportedDimension,
  MissingTruncation,
  DegenerateInterval,
  InvertedBounds,
  DegeneratePolygon,
  JacobianSignViolation,
  NonConvergence,
  SingularGram,
  ZeroMass,
  StepSizeUnderflow,
  InadmissibleStart,
  NonOrthogonalRotation,
  ZeroPitch,
  OutOfRegime,
  NoSolution,
  IncompatibleTruncation,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type. Errors raised while
// following a curve carry the arclength at which they happened.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<double> arclength = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<double> arclength() const noexcept { return arclength_; }

  Error at(double s) const { return Error(code_, detail_, s); }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<double> arclength_;
};

}  // namespace pcurve
