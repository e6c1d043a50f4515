#include "plenreg/errors.hpp"

namespace plenreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::InvalidDepth: return "InvalidDepth";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnknownLensType: return "UnknownLensType";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::InsufficientMatches: return "InsufficientMatches";
    case ErrorCode::InsufficientCorrespondences: return "InsufficientCorrespondences";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CollinearMarkers: return "CollinearMarkers";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_configuration_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
    case ErrorCode::MalformedXml:
    case ErrorCode::MissingField:
    case ErrorCode::OutOfRange:
    case ErrorCode::MalformedCsv:
    case ErrorCode::UnknownObject:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

}  // namespace plenreg
