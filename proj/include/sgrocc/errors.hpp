#pragma once

#include <stdexcept>
#include <string>

namespace sgrocc {

enum class ErrorCode {
  BehindCamera,
  NonPositiveDepth,
  DegenerateRay,
  InvalidSpec,
  CameraOutsideScene,
  GridOutsideScene,
  PathLeavesBounds,
  FracOutOfRange,
  BadPattern,
  ResidualTooLarge,
  OutOfView,
  NoSurface,
  NonUnitNormal,
  PoolOverflow,
  DimMismatch,
  EpochOutOfRange,
  Diverged,
  SpecMismatch,
  ConfigError,
  IoError,
  FormatError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::DegenerateRay: return "DegenerateRay";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::CameraOutsideScene: return "CameraOutsideScene";
    case ErrorCode::GridOutsideScene: return "GridOutsideScene";
    case ErrorCode::PathLeavesBounds: return "PathLeavesBounds";
    case ErrorCode::FracOutOfRange: return "FracOutOfRange";
    case ErrorCode::BadPattern: return "BadPattern";
    case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::OutOfView: return "OutOfView";
    case ErrorCode::NoSurface: return "NoSurface";
    case ErrorCode::NonUnitNormal: return "NonUnitNormal";
    case ErrorCode::PoolOverflow: return "PoolOverflow";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::EpochOutOfRange: return "EpochOutOfRange";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace sgrocc
