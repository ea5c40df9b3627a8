#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levelsense/chirp.hpp"
#include "levelsense/trace.hpp"

namespace levelsense {

// Container surface response to the swept drive: a damped oscillator with
// magnitude A(w) = c / sqrt((f_r^2 - w^2)^2 + (damping*w)^2), scaled so that
// A(f_r) = peak_displacement_m. response_lag_s shifts the envelope argument
// (the surface needs time to build up), displacing the apparent peak by
// sweep_rate * lag in each sweep direction. An optional second mode sits at
// 9/4 * f_r with one tenth of the displacement.
struct VibrationModel {
  double resonance_hz = 400.0;
  double damping_hz = 8.0;
  double peak_displacement_m = 5e-4;
  double response_lag_s = 0.05;
  bool second_mode = false;
};

inline constexpr double kSecondModeFreqRatio = 9.0 / 4.0;
inline constexpr double kSecondModeDisplacementRatio = 0.1;

// Oscillator magnitude at drive frequency freq_hz (first mode only).
double oscillator_magnitude(const VibrationModel& v, double freq_hz);

// Surface displacement at sweep-local time t for the given drive sweep,
// including lag and the optional second mode.
double displacement(const VibrationModel& v, const ChirpConfig& drive,
                    double t);

// One propagation path. Dynamic paths ride on the vibrating surface: their
// length is perturbed by d(t) * (cos(incidence) + cos(reflection)). Antenna m
// sees the path lengthened by m * antenna_spacing * arrival_cos, and its
// amplitude scaled by antenna_gains[m] (empty = all ones).
struct PathSpec {
  double length_m = 1.0;
  double attenuation = 1.0;
  bool dynamic = false;
  double incidence_rad = 0.0;
  double reflection_rad = 0.0;
  double arrival_cos = 1.0;
  std::vector<double> antenna_gains;
};

// Receiver clock imperfections: a per-frame common phase following a random
// walk (applied to every antenna alike) plus one static phase per antenna.
// Explicit antenna_offsets_rad override the seeded draw.
struct ClockOffsetModel {
  bool enabled = true;
  double walk_step_std_rad = 0.1;
  std::vector<double> antenna_offsets_rad;
};

struct SceneConfig {
  std::uint16_t n_rx = 3;
  std::uint16_t n_subcarriers = 30;
  double carrier_wavelength_m = 0.06;
  double antenna_spacing_m = 0.03;
  ChirpConfig chirp;              // first (ascending) sweep
  bool bidirectional = true;      // append the mirrored sweep
  double padding_s = 0.0;         // silence before excitation starts
  VibrationModel vibration;
  std::vector<PathSpec> paths;    // needs >= 1 static and >= 1 dynamic
  double noise_std = 0.0;         // std of the complex sample, E|n|^2
  ClockOffsetModel clock;
};

// Throws ErrorCode::config_error on an inconsistent scene: no static or no
// dynamic path, resonance outside the excitation band, non-positive lengths
// or wavelength, antenna gain vectors of the wrong arity, or a dynamic-path
// perturbation that is not small against the path length.
void validate_scene(const SceneConfig& scene);

double session_duration(const SceneConfig& scene);

// Channel value for one frame. common_phase_rad is the clock-walk value for
// this frame (synth_trace integrates the walk; pass 0 for a clean frame), and
// antenna_offsets must provide one static phase per antenna (empty = zeros).
// Noise draws depend only on (seed, frame_index), so identical arguments give
// a bit-identical frame.
CsiFrame synth_frame(const SceneConfig& scene, double t, std::uint64_t seed,
                     std::uint64_t frame_index, double common_phase_rad = 0.0,
                     const std::vector<double>& antenna_offsets = {});

// Full session: padding, ascending sweep, then (if bidirectional) the
// descending sweep, sampled at packet_rate. Pure function of its arguments.
// Throws ErrorCode::config_error if packet_rate < 2 * max sweep frequency.
CsiTrace synth_trace(const SceneConfig& scene, double packet_rate_hz,
                     std::uint64_t seed);

// Piecewise-linear fill level -> resonance frequency ground truth. Knot
// levels strictly increasing in [0, capacity]; frequencies strictly
// decreasing and inside [freq_min, freq_max].
struct GroundTruthCurve {
  double capacity_ml = 1800.0;
  double freq_min_hz = 140.0;
  double freq_max_hz = 900.0;
  std::vector<double> knot_levels_ml;
  std::vector<double> knot_freqs_hz;
};

void validate_curve(const GroundTruthCurve& curve);

// Linear interpolation between knots; exact at knots. Levels outside
// [0, capacity] or outside the knot range throw ErrorCode::domain_error.
double curve_frequency(const GroundTruthCurve& curve, double level_ml);

struct LabeledTrace {
  CsiTrace trace;
  double level_ml = 0.0;
  int level_class = 0;  // 1-based, ordered low to high level
  double resonance_hz = 0.0;
};

// One trace per (level, sweep) pair. Levels are sorted ascending to assign
// classes 1..K; each trace's seed derives from (seed, level index, sweep
// index) and its metadata records level_ml, level_class and resonance_hz.
std::vector<LabeledTrace> synth_dataset(const GroundTruthCurve& curve,
                                        const SceneConfig& base_scene,
                                        double packet_rate_hz,
                                        const std::vector<double>& levels_ml,
                                        int sweeps_per_level,
                                        std::uint64_t seed);

// JSON codecs for scene and curve configs (schema in docs/formats.md).
SceneConfig parse_scene_json(const std::string& text);
SceneConfig load_scene_file(const std::string& path);
std::string scene_to_json(const SceneConfig& scene);
GroundTruthCurve parse_curve_json(const std::string& text);
GroundTruthCurve load_curve_file(const std::string& path);
std::string curve_to_json(const GroundTruthCurve& curve);

}  // namespace levelsense
