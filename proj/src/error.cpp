#include "entroflow/error.hpp"

namespace entroflow {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parameter_out_of_range: return "parameter-out-of-range";
    case ErrorCode::inconsistent_evaluators: return "inconsistent-evaluators";
    case ErrorCode::bracket_failure: return "bracket-failure";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::mass_mismatch: return "mass-mismatch";
    case ErrorCode::negative_value: return "negative-value";
    case ErrorCode::trace_on_truncation_face: return "trace-on-truncation-face";
    case ErrorCode::connector_infeasible: return "connector-infeasible";
    case ErrorCode::cfl_violation: return "cfl-violation";
    case ErrorCode::scheme_failure: return "scheme-failure";
    case ErrorCode::probe_out_of_range: return "probe-out-of-range";
    case ErrorCode::degenerate_window: return "degenerate-window";
    case ErrorCode::hypothesis_violation: return "hypothesis-violation";
    case ErrorCode::support_escapes_box: return "support-escapes-box";
    case ErrorCode::zero_field: return "zero-field";
    case ErrorCode::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

}  // namespace entroflow
