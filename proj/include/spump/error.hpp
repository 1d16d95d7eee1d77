#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spump {

enum class ErrorCode {
  InvalidArgument,
  StrokeExceeded,
  UnboundedSlew,
  Infeasible,
  PlungerLimit,
  NonPhysical,
  QuantizationOverflow,
  NackReceived,
  Timeout,
  WriteFailure,
  Io,
};

std::string_view to_string(ErrorCode code);

// Domain failure raised by the planning, simulation and transport layers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spump
