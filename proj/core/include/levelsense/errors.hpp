#pragma once

#include <stdexcept>
#include <string>

namespace levelsense {

// Classifies every failure the library can raise. CLI maps config/usage
// classes to exit code 2 and everything else to 1.
enum class ErrorCode {
  config_error,
  domain_error,
  io_error,
  bad_magic,
  bad_version,
  dimension_mismatch,
  truncated_payload,
  non_monotone_timestamps,
  malformed_input,
  insufficient_data,
  degenerate_input,
  ill_posed,
  no_peak,
  mode_mismatch,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // True for errors caused by bad configuration or arguments rather than
  // bad data encountered at runtime.
  bool is_usage() const noexcept {
    return code_ == ErrorCode::config_error || code_ == ErrorCode::domain_error;
  }

 private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code) noexcept;

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace levelsense
