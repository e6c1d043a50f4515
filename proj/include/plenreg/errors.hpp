#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plenreg {

enum class ErrorCode {
  FrameMismatch,
  DegenerateConfiguration,
  InvalidDepth,
  BehindCamera,
  NoConvergence,
  MalformedXml,
  MissingField,
  OutOfRange,
  UnknownLensType,
  DimensionMismatch,
  EmptySet,
  InsufficientMatches,
  InsufficientCorrespondences,
  NoConsensus,
  MalformedCsv,
  UnknownObject,
  IndexOutOfRange,
  CollinearMarkers,
  ValidationFailed,
  LengthMismatch,
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Configuration and I/O failures map to exit status 2, everything else is an
// algorithmic failure (exit status 1).
bool is_configuration_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const { return code_; }
  const std::string& stage() const { return stage_; }

  // Copy of this error with a pipeline stage tag attached.
  Error with_stage(std::string stage) const {
    return Error(code_, what(), std::move(stage));
  }

 private:
  ErrorCode code_;
  std::string stage_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace plenreg
