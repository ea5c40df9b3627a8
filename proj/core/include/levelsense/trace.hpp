#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace levelsense {

// One captured channel snapshot: complex gains for every (rx antenna,
// subcarrier) cell at a given timestamp. Values are stored single precision
// to match the on-disk format exactly.
struct CsiFrame {
  double timestamp = 0.0;  // seconds since trace start
  Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic> values;  // n_rx x n_subcarriers
};

// A recorded (or synthesized) capture session. n_tx is carried for format
// completeness but only 1 is supported.
struct CsiTrace {
  std::uint16_t n_rx = 0;
  std::uint16_t n_tx = 1;
  std::uint16_t n_subcarriers = 0;
  double packet_rate_hz = 0.0;
  double carrier_wavelength_m = 0.0;
  std::vector<CsiFrame> frames;
  std::map<std::string, std::string> metadata;  // free-form annotations

  double duration_s() const {
    if (frames.empty() || packet_rate_hz <= 0.0) return 0.0;
    return frames.back().timestamp - frames.front().timestamp +
           1.0 / packet_rate_hz;
  }
};

struct TraceViolation {
  enum class Kind {
    empty,
    bad_dimensions,
    non_finite_value,
    non_monotone_timestamps,
    bad_packet_rate,
    bad_wavelength,
    too_few_antennas,
    unsupported_tx_count,
    frame_count_rate_mismatch,
  };
  Kind kind;
  std::string detail;
};

const char* violation_kind_name(TraceViolation::Kind kind) noexcept;

// Structural checks; returns all violations found rather than throwing, so
// callers can report a complete diagnosis. Empty result means the trace is
// well formed: finite values, strictly increasing timestamps, consistent
// frame dimensions, n_rx >= 2, n_tx == 1, and a frame count matching
// packet_rate * duration within one frame.
std::vector<TraceViolation> validate_trace(const CsiTrace& trace);

}  // namespace levelsense
