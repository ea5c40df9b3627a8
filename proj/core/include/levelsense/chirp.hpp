#pragma once

namespace levelsense {

// Linear swept-sine excitation. A sweep runs from f_start_hz to f_end_hz over
// duration_s; the sweep rate (f_end - f_start) / duration is signed, negative
// for a descending sweep.
struct ChirpConfig {
  double f_start_hz = 0.0;
  double f_end_hz = 1000.0;
  double duration_s = 15.0;
  double amplitude = 1.0;
  double initial_phase_rad = 0.0;
};

// Throws ErrorCode::config_error unless duration > 0, amplitude > 0 and
// frequencies are non-negative.
void validate_chirp(const ChirpConfig& cfg);

double sweep_rate(const ChirpConfig& cfg);

// Same band, opposite direction, same duration/amplitude/phase.
ChirpConfig reversed(const ChirpConfig& cfg);

// Instantaneous frequency at time t in [0, duration]. Out-of-range t throws
// ErrorCode::domain_error.
double chirp_frequency(const ChirpConfig& cfg, double t);

// Drive signal value at time t: amplitude * sin(phase(t)), where phase is the
// integral of the instantaneous frequency plus the initial phase.
double chirp_waveform(const ChirpConfig& cfg, double t);

// Accumulated phase in radians at time t (no range check; helper for callers
// that evaluate slightly outside the sweep, e.g. lagged envelopes).
double chirp_phase(const ChirpConfig& cfg, double t);

}  // namespace levelsense
