#pragma once

#include <stdexcept>
#include <string>

namespace affect {

enum class ErrorCode {
  MissingStream,
  OutOfRange,
  Ingest,
  Io,
  NyquistViolation,
  NotConverged,
  TooShort,
  InsufficientLuminance,
  NoValidPupil,
  TrialQuality,
  SingularMatrix,
  DegenerateLabels,
  KOutOfRange,
  UnknownFeature,
  SingleClass,
  ColumnMismatch,
  TooFewSamples,
  UnstratifiableFolds,
  NoValidGaze,
  InsufficientPairs,
  InvalidConfig,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingStream: return "MissingStream";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::Ingest: return "Ingest";
    case ErrorCode::Io: return "Io";
    case ErrorCode::NyquistViolation: return "NyquistViolation";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::InsufficientLuminance: return "InsufficientLuminance";
    case ErrorCode::NoValidPupil: return "NoValidPupil";
    case ErrorCode::TrialQuality: return "TrialQuality";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::ColumnMismatch: return "ColumnMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::UnstratifiableFolds: return "UnstratifiableFolds";
    case ErrorCode::NoValidGaze: return "NoValidGaze";
    case ErrorCode::InsufficientPairs: return "InsufficientPairs";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Domain error carrying a machine-readable code. Every failure the library
/// reports on purpose is an `affect::Error`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace affect
