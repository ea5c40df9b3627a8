#include "levelsense/chirp.hpp"

#include <cmath>
#include <string>

#include "levelsense/errors.hpp"

namespace levelsense {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void validate_chirp(const ChirpConfig& cfg) {
  if (!(cfg.duration_s > 0.0))
    raise(ErrorCode::config_error, "chirp duration must be positive");
  if (!(cfg.amplitude > 0.0))
    raise(ErrorCode::config_error, "chirp amplitude must be positive");
  if (cfg.f_start_hz < 0.0 || cfg.f_end_hz < 0.0)
    raise(ErrorCode::config_error, "chirp frequencies must be non-negative");
  if (!std::isfinite(cfg.f_start_hz) || !std::isfinite(cfg.f_end_hz) ||
      !std::isfinite(cfg.duration_s))
    raise(ErrorCode::config_error, "chirp parameters must be finite");
}

double sweep_rate(const ChirpConfig& cfg) {
  return (cfg.f_end_hz - cfg.f_start_hz) / cfg.duration_s;
}

ChirpConfig reversed(const ChirpConfig& cfg) {
  ChirpConfig r = cfg;
  r.f_start_hz = cfg.f_end_hz;
  r.f_end_hz = cfg.f_start_hz;
  return r;
}

double chirp_frequency(const ChirpConfig& cfg, double t) {
  validate_chirp(cfg);
  if (t < 0.0 || t > cfg.duration_s)
    raise(ErrorCode::domain_error,
          "time " + std::to_string(t) + " outside sweep [0, " +
              std::to_string(cfg.duration_s) + "]");
  return cfg.f_start_hz + sweep_rate(cfg) * t;
}

double chirp_phase(const ChirpConfig& cfg, double t) {
  return kTwoPi * (cfg.f_start_hz * t + 0.5 * sweep_rate(cfg) * t * t) +
         cfg.initial_phase_rad;
}

double chirp_waveform(const ChirpConfig& cfg, double t) {
  validate_chirp(cfg);
  if (t < 0.0 || t > cfg.duration_s)
    raise(ErrorCode::domain_error,
          "time " + std::to_string(t) + " outside sweep [0, " +
              std::to_string(cfg.duration_s) + "]");
  return cfg.amplitude * std::sin(chirp_phase(cfg, t));
}

}  // namespace levelsense
