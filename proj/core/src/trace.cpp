#include "levelsense/trace.hpp"

#include <cmath>
#include <sstream>

namespace levelsense {

const char* violation_kind_name(TraceViolation::Kind kind) noexcept {
  using Kind = TraceViolation::Kind;
  switch (kind) {
    case Kind::empty: return "empty";
    case Kind::bad_dimensions: return "bad_dimensions";
    case Kind::non_finite_value: return "non_finite_value";
    case Kind::non_monotone_timestamps: return "non_monotone_timestamps";
    case Kind::bad_packet_rate: return "bad_packet_rate";
    case Kind::bad_wavelength: return "bad_wavelength";
    case Kind::too_few_antennas: return "too_few_antennas";
    case Kind::unsupported_tx_count: return "unsupported_tx_count";
    case Kind::frame_count_rate_mismatch: return "frame_count_rate_mismatch";
  }
  return "unknown";
}

std::vector<TraceViolation> validate_trace(const CsiTrace& trace) {
  using Kind = TraceViolation::Kind;
  std::vector<TraceViolation> out;
  auto add = [&out](Kind kind, std::string detail) {
    out.push_back({kind, std::move(detail)});
  };

  if (!(trace.packet_rate_hz > 0.0) || !std::isfinite(trace.packet_rate_hz))
    add(Kind::bad_packet_rate,
        "packet_rate_hz = " + std::to_string(trace.packet_rate_hz));
  if (!(trace.carrier_wavelength_m > 0.0) ||
      !std::isfinite(trace.carrier_wavelength_m))
    add(Kind::bad_wavelength,
        "carrier_wavelength_m = " + std::to_string(trace.carrier_wavelength_m));
  if (trace.n_rx < 2)
    add(Kind::too_few_antennas,
        "n_rx = " + std::to_string(trace.n_rx) + ", downstream needs >= 2");
  if (trace.n_tx != 1)
    add(Kind::unsupported_tx_count, "n_tx = " + std::to_string(trace.n_tx));
  if (trace.frames.empty()) {
    add(Kind::empty, "trace holds no frames");
    return out;
  }

  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const CsiFrame& f = trace.frames[i];
    if (f.values.rows() != trace.n_rx ||
        f.values.cols() != trace.n_subcarriers) {
      std::ostringstream os;
      os << "frame " << i << " is " << f.values.rows() << "x"
         << f.values.cols() << ", header says " << trace.n_rx << "x"
         << trace.n_subcarriers;
      add(Kind::bad_dimensions, os.str());
      continue;
    }
    if (!std::isfinite(f.timestamp)) {
      std::ostringstream os;
      os << "frame " << i << " timestamp";
      add(Kind::non_finite_value, os.str());
    }
    for (Eigen::Index r = 0; r < f.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < f.values.cols(); ++c) {
        const std::complex<float>& v = f.values(r, c);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          std::ostringstream os;
          os << "frame " << i << " antenna " << r << " subcarrier " << c;
          add(Kind::non_finite_value, os.str());
        }
      }
    }
    if (i > 0 && !(trace.frames[i - 1].timestamp < f.timestamp)) {
      std::ostringstream os;
      os << "frame " << i << " timestamp " << f.timestamp
         << " does not increase past " << trace.frames[i - 1].timestamp;
      add(Kind::non_monotone_timestamps, os.str());
    }
  }

  if (trace.packet_rate_hz > 0.0) {
    double expected = trace.packet_rate_hz * trace.duration_s();
    double count = static_cast<double>(trace.frames.size());
    if (std::abs(count - std::round(expected)) > 1.0) {
      std::ostringstream os;
      os << trace.frames.size() << " frames, but rate * duration = "
         << expected;
      add(Kind::frame_count_rate_mismatch, os.str());
    }
  }
  return out;
}

}  // namespace levelsense
