#include "bioholo/error.hpp"

namespace bioholo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OutOfOrderSample: return "OutOfOrderSample";
    case ErrorCode::BpmOutOfRange: return "BpmOutOfRange";
    case ErrorCode::NonPositiveBpm: return "NonPositiveBpm";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::ZeroRadius: return "ZeroRadius";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ModulationOutOfPerceptibleRange: return "ModulationOutOfPerceptibleRange";
    case ErrorCode::FocusBehindArray: return "FocusBehindArray";
    case ErrorCode::SingularEvaluationPoint: return "SingularEvaluationPoint";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::NotHello: return "NotHello";
    case ErrorCode::DuplicateRole: return "DuplicateRole";
    case ErrorCode::ConnectionRefused: return "ConnectionRefused";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::AssertionFailed: return "AssertionFailed";
  }
  return "Unknown";
}

}  // namespace bioholo
