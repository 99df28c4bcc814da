#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rplace {

enum class ErrorCode {
  InvalidArgument,
  ObjectNotFound,
  GraspInfeasible,
  NothingHeld,
  AlreadyHolding,
  PlacementCollision,
  PushBlocked,
  DistanceCapExceeded,
  OutOfBounds,
  BehindCamera,
  DegenerateContour,
  NotAQuadrilateral,
  SingularConfiguration,
  DivergedOptimization,
  ObjectNotDetected,
  AmbiguousDetection,
  CorrectionStalled,
  EmptyInput,
  IoFailure,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (controller, harness, CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ObjectNotFound: return "ObjectNotFound";
    case ErrorCode::GraspInfeasible: return "GraspInfeasible";
    case ErrorCode::NothingHeld: return "NothingHeld";
    case ErrorCode::AlreadyHolding: return "AlreadyHolding";
    case ErrorCode::PlacementCollision: return "PlacementCollision";
    case ErrorCode::PushBlocked: return "PushBlocked";
    case ErrorCode::DistanceCapExceeded: return "DistanceCapExceeded";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::DegenerateContour: return "DegenerateContour";
    case ErrorCode::NotAQuadrilateral: return "NotAQuadrilateral";
    case ErrorCode::SingularConfiguration: return "SingularConfiguration";
    case ErrorCode::DivergedOptimization: return "DivergedOptimization";
    case ErrorCode::ObjectNotDetected: return "ObjectNotDetected";
    case ErrorCode::AmbiguousDetection: return "AmbiguousDetection";
    case ErrorCode::CorrectionStalled: return "CorrectionStalled";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace rplace
