#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mammoseg {

enum class ErrorCode {
  BadMagic,
  BadHeader,
  TruncatedRaster,
  EvenWindow,
  EmptyHistogram,
  NoMarkers,
  EmptyDomain,
  EmptyComponent,
  InvalidCalibration,
  NegativeDiameter,
  NonFinite,
  NonPositiveDiameter,
  ParseError,
  InvalidArgument,
  InvalidParams,
  PrerequisiteMissing,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::TruncatedRaster: return "TruncatedRaster";
    case ErrorCode::EvenWindow: return "EvenWindow";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::NoMarkers: return "NoMarkers";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::EmptyComponent: return "EmptyComponent";
    case ErrorCode::InvalidCalibration: return "InvalidCalibration";
    case ErrorCode::NegativeDiameter: return "NegativeDiameter";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NonPositiveDiameter: return "NonPositiveDiameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::PrerequisiteMissing: return "PrerequisiteMissing";
  }
  return "Unknown";
}

/// Library error. `field()` names the offending input field when one applies
/// (e.g. the JSON path of a report document).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace mammoseg
