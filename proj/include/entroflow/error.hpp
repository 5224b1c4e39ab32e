#pragma once

#include <stdexcept>
#include <string>

namespace entroflow {

enum class ErrorCode {
  parameter_out_of_range,
  inconsistent_evaluators,
  bracket_failure,
  dimension_mismatch,
  mass_mismatch,
  negative_value,
  trace_on_truncation_face,
  connector_infeasible,
  cfl_violation,
  scheme_failure,
  probe_out_of_range,
  degenerate_window,
  hypothesis_violation,
  support_escapes_box,
  zero_field,
  invalid_argument,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; the code tells callers (and the CLI
/// exit-code mapping) which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace entroflow
