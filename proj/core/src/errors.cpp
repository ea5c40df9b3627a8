#include "levelsense/errors.hpp"

namespace levelsense {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::bad_version: return "bad_version";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::truncated_payload: return "truncated_payload";
    case ErrorCode::non_monotone_timestamps: return "non_monotone_timestamps";
    case ErrorCode::malformed_input: return "malformed_input";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::degenerate_input: return "degenerate_input";
    case ErrorCode::ill_posed: return "ill_posed";
    case ErrorCode::no_peak: return "no_peak";
    case ErrorCode::mode_mismatch: return "mode_mismatch";
  }
  return "unknown";
}

}  // namespace levelsense
