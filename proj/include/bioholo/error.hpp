#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bioholo {

enum class ErrorCode {
  InvalidArgument,
  TooFewPoints,
  DegenerateConfiguration,
  LengthMismatch,
  OutOfOrderSample,
  BpmOutOfRange,
  NonPositiveBpm,
  EmptyWindow,
  ZeroRadius,
  OutOfRange,
  ModulationOutOfPerceptibleRange,
  FocusBehindArray,
  SingularEvaluationPoint,
  MalformedMessage,
  UnknownType,
  VersionMismatch,
  NotHello,
  DuplicateRole,
  ConnectionRefused,
  PortInUse,
  InvalidConfig,
  ParseError,
  AssertionFailed,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bioholo
