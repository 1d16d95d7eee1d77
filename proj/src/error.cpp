#include "spump/error.hpp"

namespace spump {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::StrokeExceeded: return "StrokeExceeded";
    case ErrorCode::UnboundedSlew: return "UnboundedSlew";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::PlungerLimit: return "PlungerLimit";
    case ErrorCode::NonPhysical: return "NonPhysical";
    case ErrorCode::QuantizationOverflow: return "QuantizationOverflow";
    case ErrorCode::NackReceived: return "NackReceived";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::WriteFailure: return "WriteFailure";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace spump
