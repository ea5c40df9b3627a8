#include "levelsense/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <numeric>

#include "levelsense/errors.hpp"
#include "levelsense/rng.hpp"

namespace levelsense {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Stream tags keep the random draw families independent of one another.
constexpr std::uint64_t kTagNoise = 0x6e6f697365ULL;
constexpr std::uint64_t kTagWalk = 0x77616c6bULL;
constexpr std::uint64_t kTagOffsets = 0x6f666673ULL;
constexpr std::uint64_t kTagDataset = 0x64617461ULL;

double raw_chirp_freq(const ChirpConfig& c, double t) {
  return c.f_start_hz + sweep_rate(c) * t;
}

double mode_magnitude(double peak_disp, double damping, double f_mode,
                      double freq) {
  double num = peak_disp * damping * f_mode;
  double a = f_mode * f_mode - freq * freq;
  double b = damping * freq;
  return num / std::sqrt(a * a + b * b);
}

struct SweepWindow {
  ChirpConfig chirp;
  double t0 = 0.0;
  double t1 = 0.0;
};

std::vector<SweepWindow> sweep_plan(const SceneConfig& scene) {
  std::vector<SweepWindow> plan;
  double t = scene.padding_s;
  plan.push_back({scene.chirp, t, t + scene.chirp.duration_s});
  if (scene.bidirectional) {
    t += scene.chirp.duration_s;
    plan.push_back({reversed(scene.chirp), t, t + scene.chirp.duration_s});
  }
  return plan;
}

std::vector<double> resolve_antenna_offsets(const SceneConfig& scene,
                                            std::uint64_t seed) {
  std::vector<double> offsets(scene.n_rx, 0.0);
  if (!scene.clock.enabled) return offsets;
  if (!scene.clock.antenna_offsets_rad.empty()) {
    offsets = scene.clock.antenna_offsets_rad;
    return offsets;
  }
  SplitMix64 rng(derive_stream(seed, kTagOffsets, 0));
  for (double& o : offsets) o = (rng.next_double() * 2.0 - 1.0) * 3.14159265358979323846;
  return offsets;
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

double oscillator_magnitude(const VibrationModel& v, double freq_hz) {
  return mode_magnitude(v.peak_displacement_m, v.damping_hz, v.resonance_hz,
                        freq_hz);
}

double displacement(const VibrationModel& v, const ChirpConfig& drive,
                    double t) {
  double lagged_freq = raw_chirp_freq(drive, t - v.response_lag_s);
  double amp = mode_magnitude(v.peak_displacement_m, v.damping_hz,
                              v.resonance_hz, lagged_freq);
  if (v.second_mode) {
    amp += mode_magnitude(
        v.peak_displacement_m * kSecondModeDisplacementRatio, v.damping_hz,
        v.resonance_hz * kSecondModeFreqRatio, lagged_freq);
  }
  return amp * std::sin(chirp_phase(drive, t));
}

void validate_scene(const SceneConfig& scene) {
  if (scene.n_rx < 2)
    raise(ErrorCode::config_error, "scene needs n_rx >= 2");
  if (scene.n_subcarriers < 1)
    raise(ErrorCode::config_error, "scene needs n_subcarriers >= 1");
  if (!(scene.carrier_wavelength_m > 0.0))
    raise(ErrorCode::config_error, "carrier wavelength must be positive");
  if (scene.antenna_spacing_m < 0.0)
    raise(ErrorCode::config_error, "antenna spacing must be non-negative");
  if (scene.padding_s < 0.0)
    raise(ErrorCode::config_error, "padding must be non-negative");
  if (scene.noise_std < 0.0)
    raise(ErrorCode::config_error, "noise_std must be non-negative");
  if (scene.clock.walk_step_std_rad < 0.0)
    raise(ErrorCode::config_error, "walk step std must be non-negative");
  if (!scene.clock.antenna_offsets_rad.empty() &&
      scene.clock.antenna_offsets_rad.size() != scene.n_rx)
    raise(ErrorCode::config_error,
          "clock antenna_offsets_rad must list one phase per antenna");
  validate_chirp(scene.chirp);

  const VibrationModel& v = scene.vibration;
  if (!(v.resonance_hz > 0.0) || !(v.damping_hz > 0.0))
    raise(ErrorCode::config_error,
          "vibration resonance and damping must be positive");
  if (v.peak_displacement_m < 0.0 || v.response_lag_s < 0.0)
    raise(ErrorCode::config_error,
          "vibration displacement and lag must be non-negative");
  double band_lo = std::min(scene.chirp.f_start_hz, scene.chirp.f_end_hz);
  double band_hi = std::max(scene.chirp.f_start_hz, scene.chirp.f_end_hz);
  if (v.resonance_hz < band_lo || v.resonance_hz > band_hi)
    raise(ErrorCode::config_error,
          "resonance " + std::to_string(v.resonance_hz) +
              " Hz lies outside the excitation band [" +
              std::to_string(band_lo) + ", " + std::to_string(band_hi) + "]");

  int n_static = 0, n_dynamic = 0;
  for (std::size_t k = 0; k < scene.paths.size(); ++k) {
    const PathSpec& p = scene.paths[k];
    if (!(p.length_m > 0.0))
      raise(ErrorCode::config_error,
            "path " + std::to_string(k) + " length must be positive");
    if (!(p.attenuation > 0.0))
      raise(ErrorCode::config_error,
            "path " + std::to_string(k) + " attenuation must be positive");
    if (std::abs(p.arrival_cos) > 1.0)
      raise(ErrorCode::config_error,
            "path " + std::to_string(k) + " arrival_cos must be in [-1, 1]");
    if (!p.antenna_gains.empty() && p.antenna_gains.size() != scene.n_rx)
      raise(ErrorCode::config_error,
            "path " + std::to_string(k) +
                " antenna_gains must list one gain per antenna");
    for (double g : p.antenna_gains)
      if (g < 0.0)
        raise(ErrorCode::config_error,
              "path " + std::to_string(k) + " antenna gains must be >= 0");
    if (p.dynamic) {
      ++n_dynamic;
      double geom = std::abs(std::cos(p.incidence_rad) +
                             std::cos(p.reflection_rad));
      double swing = v.peak_displacement_m *
                     (1.0 + (v.second_mode ? kSecondModeDisplacementRatio : 0.0)) *
                     geom;
      if (swing > p.length_m / 100.0)
        raise(ErrorCode::config_error,
              "path " + std::to_string(k) + " perturbation " +
                  std::to_string(swing) +
                  " m is not small against its length " +
                  std::to_string(p.length_m) + " m");
    } else {
      ++n_static;
    }
  }
  if (n_static < 1 || n_dynamic < 1)
    raise(ErrorCode::config_error,
          "scene needs at least one static and one dynamic path");
}

double session_duration(const SceneConfig& scene) {
  return scene.padding_s +
         scene.chirp.duration_s * (scene.bidirectional ? 2.0 : 1.0);
}

CsiFrame synth_frame(const SceneConfig& scene, double t, std::uint64_t seed,
                     std::uint64_t frame_index, double common_phase_rad,
                     const std::vector<double>& antenna_offsets) {
  // Surface displacement at this instant, zero outside the sweeps.
  double d = 0.0;
  for (const SweepWindow& sw : sweep_plan(scene)) {
    if (t >= sw.t0 && t < sw.t1) {
      d = displacement(scene.vibration, sw.chirp, t - sw.t0);
      break;
    }
  }

  const double lambda = scene.carrier_wavelength_m;
  CsiFrame frame;
  frame.timestamp = t;
  frame.values.resize(scene.n_rx, scene.n_subcarriers);

  for (int m = 0; m < scene.n_rx; ++m) {
    std::complex<double> h{0.0, 0.0};
    for (const PathSpec& p : scene.paths) {
      double len = p.length_m +
                   m * scene.antenna_spacing_m * p.arrival_cos;
      if (p.dynamic)
        len += d * (std::cos(p.incidence_rad) + std::cos(p.reflection_rad));
      double gain = p.attenuation;
      if (!p.antenna_gains.empty()) gain *= p.antenna_gains[m];
      if (gain == 0.0) continue;
      h += std::polar(gain / (len * len), -kTwoPi * len / lambda);
    }
    double clock_phase = common_phase_rad;
    if (m < static_cast<int>(antenna_offsets.size()))
      clock_phase += antenna_offsets[m];
    if (clock_phase != 0.0) h *= std::polar(1.0, clock_phase);
    for (int c = 0; c < scene.n_subcarriers; ++c)
      frame.values(m, c) = std::complex<float>(static_cast<float>(h.real()),
                                               static_cast<float>(h.imag()));
  }

  if (scene.noise_std > 0.0) {
    SplitMix64 rng(derive_stream(seed, kTagNoise, frame_index));
    const double comp_std = scene.noise_std / std::sqrt(2.0);
    for (int m = 0; m < scene.n_rx; ++m) {
      for (int c = 0; c < scene.n_subcarriers; ++c) {
        float re = static_cast<float>(rng.next_gaussian() * comp_std);
        float im = static_cast<float>(rng.next_gaussian() * comp_std);
        frame.values(m, c) += std::complex<float>(re, im);
      }
    }
  }
  return frame;
}

CsiTrace synth_trace(const SceneConfig& scene, double packet_rate_hz,
                     std::uint64_t seed) {
  validate_scene(scene);
  double band_hi = std::max(scene.chirp.f_start_hz, scene.chirp.f_end_hz);
  if (!(packet_rate_hz > 0.0))
    raise(ErrorCode::config_error, "packet rate must be positive");
  if (packet_rate_hz < 2.0 * band_hi)
    raise(ErrorCode::config_error,
          "packet rate " + std::to_string(packet_rate_hz) +
              " Hz undersamples the sweep top " + std::to_string(band_hi) +
              " Hz (needs >= 2x)");

  CsiTrace trace;
  trace.n_rx = scene.n_rx;
  trace.n_tx = 1;
  trace.n_subcarriers = scene.n_subcarriers;
  trace.packet_rate_hz = packet_rate_hz;
  trace.carrier_wavelength_m = scene.carrier_wavelength_m;

  const auto n_frames = static_cast<std::uint64_t>(
      std::llround(packet_rate_hz * session_duration(scene)));
  std::vector<double> offsets = resolve_antenna_offsets(scene, seed);

  const bool walk_on =
      scene.clock.enabled && scene.clock.walk_step_std_rad > 0.0;
  double walk = 0.0;
  trace.frames.reserve(n_frames);
  for (std::uint64_t i = 0; i < n_frames; ++i) {
    if (walk_on) {
      SplitMix64 rng(derive_stream(seed, kTagWalk, i));
      walk += rng.next_gaussian() * scene.clock.walk_step_std_rad;
    }
    double t = static_cast<double>(i) / packet_rate_hz;
    trace.frames.push_back(synth_frame(scene, t, seed, i, walk, offsets));
  }

  trace.metadata["resonance_hz"] = format_double(scene.vibration.resonance_hz);
  trace.metadata["response_lag_s"] =
      format_double(scene.vibration.response_lag_s);
  trace.metadata["sweep_f_start_hz"] = format_double(scene.chirp.f_start_hz);
  trace.metadata["sweep_f_end_hz"] = format_double(scene.chirp.f_end_hz);
  trace.metadata["sweep_duration_s"] = format_double(scene.chirp.duration_s);
  trace.metadata["sweeps"] = scene.bidirectional ? "up,down" : "up";
  trace.metadata["padding_s"] = format_double(scene.padding_s);
  trace.metadata["seed"] = std::to_string(seed);
  return trace;
}

void validate_curve(const GroundTruthCurve& curve) {
  if (!(curve.capacity_ml > 0.0))
    raise(ErrorCode::config_error, "curve capacity must be positive");
  if (curve.knot_levels_ml.size() != curve.knot_freqs_hz.size())
    raise(ErrorCode::config_error,
          "curve knot level/frequency lists differ in length");
  if (curve.knot_levels_ml.size() < 2)
    raise(ErrorCode::config_error, "curve needs at least two knots");
  if (!(curve.freq_min_hz < curve.freq_max_hz))
    raise(ErrorCode::config_error, "curve frequency bounds are inverted");
  for (std::size_t i = 0; i < curve.knot_levels_ml.size(); ++i) {
    double l = curve.knot_levels_ml[i];
    double f = curve.knot_freqs_hz[i];
    if (l < 0.0 || l > curve.capacity_ml)
      raise(ErrorCode::config_error,
            "curve knot level " + std::to_string(l) +
                " outside [0, capacity]");
    if (f < curve.freq_min_hz || f > curve.freq_max_hz)
      raise(ErrorCode::config_error,
            "curve knot frequency " + std::to_string(f) + " outside [" +
                std::to_string(curve.freq_min_hz) + ", " +
                std::to_string(curve.freq_max_hz) + "]");
    if (i > 0) {
      if (!(curve.knot_levels_ml[i - 1] < l))
        raise(ErrorCode::config_error,
              "curve knot levels must strictly increase");
      if (!(curve.knot_freqs_hz[i - 1] > f))
        raise(ErrorCode::config_error,
              "curve knot frequencies must strictly decrease");
    }
  }
}

double curve_frequency(const GroundTruthCurve& curve, double level_ml) {
  validate_curve(curve);
  if (level_ml < 0.0 || level_ml > curve.capacity_ml)
    raise(ErrorCode::domain_error,
          "level " + std::to_string(level_ml) + " ml outside [0, " +
              std::to_string(curve.capacity_ml) + "]");
  const auto& ls = curve.knot_levels_ml;
  const auto& fs = curve.knot_freqs_hz;
  if (level_ml < ls.front() || level_ml > ls.back())
    raise(ErrorCode::domain_error,
          "level " + std::to_string(level_ml) +
              " ml outside the curve's knot range [" +
              std::to_string(ls.front()) + ", " + std::to_string(ls.back()) +
              "]");
  auto it = std::upper_bound(ls.begin(), ls.end(), level_ml);
  if (it == ls.begin()) return fs.front();
  if (it == ls.end()) return fs.back();
  std::size_t hi = static_cast<std::size_t>(it - ls.begin());
  std::size_t lo = hi - 1;
  double w = (level_ml - ls[lo]) / (ls[hi] - ls[lo]);
  return fs[lo] + w * (fs[hi] - fs[lo]);
}

std::vector<LabeledTrace> synth_dataset(const GroundTruthCurve& curve,
                                        const SceneConfig& base_scene,
                                        double packet_rate_hz,
                                        const std::vector<double>& levels_ml,
                                        int sweeps_per_level,
                                        std::uint64_t seed) {
  validate_curve(curve);
  if (levels_ml.empty())
    raise(ErrorCode::config_error, "dataset needs at least one level");
  if (sweeps_per_level < 1)
    raise(ErrorCode::config_error, "sweeps_per_level must be >= 1");

  std::vector<double> sorted = levels_ml;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    raise(ErrorCode::config_error, "dataset levels must be distinct");

  std::vector<LabeledTrace> out;
  out.reserve(sorted.size() * static_cast<std::size_t>(sweeps_per_level));
  for (std::size_t li = 0; li < sorted.size(); ++li) {
    double freq = curve_frequency(curve, sorted[li]);
    SceneConfig scene = base_scene;
    scene.vibration.resonance_hz = freq;
    for (int s = 0; s < sweeps_per_level; ++s) {
      std::uint64_t trace_seed = derive_stream(
          seed, kTagDataset,
          (static_cast<std::uint64_t>(li) << 32) | static_cast<std::uint64_t>(s));
      LabeledTrace labeled;
      labeled.trace = synth_trace(scene, packet_rate_hz, trace_seed);
      labeled.level_ml = sorted[li];
      labeled.level_class = static_cast<int>(li) + 1;
      labeled.resonance_hz = freq;
      labeled.trace.metadata["level_ml"] = format_double(sorted[li]);
      labeled.trace.metadata["level_class"] =
          std::to_string(labeled.level_class);
      out.push_back(std::move(labeled));
    }
  }
  return out;
}

}  // namespace levelsense
