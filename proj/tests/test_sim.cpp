#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "levelsense/rng.hpp"
#include "levelsense/sim.hpp"
#include "levelsense/trace_io.hpp"
#include "test_util.hpp"

namespace ls = levelsense;
using lstest::code_of;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Two antennas, one static and one dynamic path, noiseless and clock-free.
ls::SceneConfig make_scene(double resonance_hz = 400.0) {
  ls::SceneConfig scene;
  scene.n_rx = 2;
  scene.n_subcarriers = 4;
  scene.vibration.resonance_hz = resonance_hz;
  scene.vibration.response_lag_s = 0.0;
  scene.vibration.peak_displacement_m = 5e-4;
  scene.noise_std = 0.0;
  scene.clock.enabled = false;
  ls::PathSpec los;
  los.length_m = 2.0;
  los.attenuation = 1.0;
  ls::PathSpec surface;
  surface.length_m = 2.4;
  surface.attenuation = 0.6;
  surface.dynamic = true;
  surface.incidence_rad = 0.3;
  surface.reflection_rad = 0.3;
  surface.arrival_cos = 0.4;
  scene.paths = {los, surface};
  return scene;
}

std::string trace_bytes(const ls::CsiTrace& trace) {
  std::ostringstream out;
  ls::write_trace(trace, out, ls::TraceFormat::binary);
  return out.str();
}

}  // namespace

TEST_CASE("single static unit path gives unit magnitude and fixed phase") {
  ls::SceneConfig scene;
  scene.n_rx = 2;
  scene.n_subcarriers = 5;
  scene.carrier_wavelength_m = 0.06;
  scene.antenna_spacing_m = 0.0;
  scene.noise_std = 0.0;
  scene.clock.enabled = false;
  ls::PathSpec path;
  path.length_m = 1.0;
  path.attenuation = 1.0;
  scene.paths = {path};

  ls::CsiFrame frame = ls::synth_frame(scene, 0.1, 7, 0);
  REQUIRE(frame.values.rows() == 2);
  REQUIRE(frame.values.cols() == 5);
  double expected_phase = std::remainder(-kTwoPi / 0.06, kTwoPi);
  CHECK(expected_phase == doctest::Approx(kTwoPi / 3.0).epsilon(1e-9));
  for (int m = 0; m < 2; ++m) {
    for (int c = 0; c < 5; ++c) {
      std::complex<double> v = frame.values(m, c);
      CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(std::arg(v) == doctest::Approx(expected_phase).epsilon(1e-5));
    }
  }
}

TEST_CASE("path amplitude follows inverse square length") {
  ls::SceneConfig scene;
  scene.n_rx = 2;
  scene.n_subcarriers = 1;
  scene.antenna_spacing_m = 0.0;
  scene.noise_std = 0.0;
  scene.clock.enabled = false;
  ls::PathSpec path;
  path.length_m = 3.0;
  path.attenuation = 0.9;
  scene.paths = {path};
  ls::CsiFrame frame = ls::synth_frame(scene, 0.0, 1, 0);
  CHECK(std::abs(std::complex<double>(frame.values(0, 0))) ==
        doctest::Approx(0.9 / 9.0).epsilon(1e-6));
}

TEST_CASE("default bidirectional session is 30 s of frames") {
  ls::SceneConfig scene = make_scene();
  CHECK(ls::session_duration(scene) == doctest::Approx(30.0));
  ls::CsiTrace trace = ls::synth_trace(scene, 2000.0, 11);
  CHECK(trace.frames.size() == 60000);
  CHECK(trace.duration_s() == doctest::Approx(30.0));
  CHECK(trace.n_rx == 2);
  CHECK(trace.metadata.at("sweeps") == "up,down");
  CHECK(trace.metadata.at("resonance_hz") == "400");
  for (std::size_t i = 1; i < 200; ++i)
    CHECK(trace.frames[i].timestamp > trace.frames[i - 1].timestamp);
}

TEST_CASE("identical arguments reproduce the trace bit for bit") {
  ls::SceneConfig scene = make_scene();
  scene.noise_std = 0.05;
  scene.clock.enabled = true;
  scene.chirp.duration_s = 1.0;
  ls::CsiTrace a = ls::synth_trace(scene, 2000.0, 42);
  ls::CsiTrace b = ls::synth_trace(scene, 2000.0, 42);
  CHECK(trace_bytes(a) == trace_bytes(b));
  ls::CsiTrace c = ls::synth_trace(scene, 2000.0, 43);
  CHECK(trace_bytes(a) != trace_bytes(c));
}

TEST_CASE("noise draws ignore the clock phase argument") {
  ls::SceneConfig scene;
  scene.n_rx = 2;
  scene.n_subcarriers = 3;
  scene.noise_std = 0.1;
  scene.paths = {};  // pure noise frame
  ls::CsiFrame a = ls::synth_frame(scene, 0.0, 5, 17, 0.0);
  ls::CsiFrame b = ls::synth_frame(scene, 0.0, 5, 17, 1.2345);
  CHECK((a.values.array() == b.values.array()).all());
  ls::CsiFrame c = ls::synth_frame(scene, 0.0, 5, 18, 0.0);
  CHECK(!(a.values.array() == c.values.array()).all());
  ls::CsiFrame d = ls::synth_frame(scene, 0.0, 6, 17, 0.0);
  CHECK(!(a.values.array() == d.values.array()).all());
}

TEST_CASE("oscillator magnitude peaks at resonance") {
  ls::VibrationModel v;
  v.resonance_hz = 400.0;
  v.damping_hz = 8.0;
  v.peak_displacement_m = 5e-4;
  CHECK(ls::oscillator_magnitude(v, 400.0) ==
        doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(ls::oscillator_magnitude(v, 200.0) < 0.1 * 5e-4);
  CHECK(ls::oscillator_magnitude(v, 800.0) < 0.1 * 5e-4);
  CHECK(ls::oscillator_magnitude(v, 399.0) <
        ls::oscillator_magnitude(v, 400.0));
  CHECK(ls::oscillator_magnitude(v, 401.0) <
        ls::oscillator_magnitude(v, 400.0));
}

TEST_CASE("displacement envelope tracks the lagged drive frequency") {
  ls::VibrationModel v;
  v.resonance_hz = 300.0;
  v.damping_hz = 8.0;
  v.peak_displacement_m = 1e-3;
  v.response_lag_s = 0.05;
  ls::ChirpConfig drive{0.0, 1000.0, 15.0};
  double rate = ls::sweep_rate(drive);
  for (double t : {2.0, 4.5, 6.0, 9.0}) {
    double lagged_freq = drive.f_start_hz + rate * (t - v.response_lag_s);
    double expected = ls::oscillator_magnitude(v, lagged_freq) *
                      std::sin(ls::chirp_phase(drive, t));
    CHECK(ls::displacement(v, drive, t) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("second mode adds a scaled resonance at 9/4 the frequency") {
  CHECK(ls::kSecondModeFreqRatio == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(ls::kSecondModeDisplacementRatio ==
        doctest::Approx(0.1).epsilon(1e-15));

  ls::VibrationModel base;
  base.resonance_hz = 200.0;
  base.damping_hz = 8.0;
  base.peak_displacement_m = 1e-3;
  base.response_lag_s = 0.0;
  ls::VibrationModel with_mode = base;
  with_mode.second_mode = true;
  ls::VibrationModel mode_only = base;
  mode_only.resonance_hz = 200.0 * ls::kSecondModeFreqRatio;
  mode_only.peak_displacement_m = 1e-3 * ls::kSecondModeDisplacementRatio;

  ls::ChirpConfig drive{0.0, 1000.0, 15.0};
  for (double t : {1.0, 3.0, 6.75, 9.0}) {
    double extra = ls::displacement(with_mode, drive, t) -
                   ls::displacement(base, drive, t);
    CHECK(extra ==
          doctest::Approx(ls::displacement(mode_only, drive, t)).epsilon(1e-9));
  }
}

TEST_CASE("scene validation rejects inconsistent configurations") {
  CHECK_NOTHROW(ls::validate_scene(make_scene()));

  ls::SceneConfig s = make_scene();
  s.n_rx = 1;
  CHECK(code_of([&] { ls::validate_scene(s); }) == ls::ErrorCode::config_error);

  s = make_scene();
  s.vibration.resonance_hz = 1200.0;  // outside the 0..1000 sweep
  CHECK(code_of([&] { ls::validate_scene(s); }) == ls::ErrorCode::config_error);

  s = make_scene();
  s.paths.pop_back();  // dynamic path gone
  CHECK(code_of([&] { ls::validate_scene(s); }) == ls::ErrorCode::config_error);

  s = make_scene();
  s.paths.erase(s.paths.begin());  // static path gone
  CHECK(code_of([&] { ls::validate_scene(s); }) == ls::ErrorCode::config_error);

  s = make_scene();
  s.paths[0].antenna_gains = {1.0, 1.0, 1.0};  // scene has 2 antennas
  CHECK(code_of([&] { ls::validate_scene(s); }) == ls::ErrorCode::config_error);

  s = make_scene();
  s.paths[1].length_m = 0.0;
  CHECK(code_of([&] { ls::validate_scene(s); }) == ls::ErrorCode::config_error);

  s = make_scene();
  s.vibration.peak_displacement_m = 0.05;  // 10 cm swing on a 2.4 m path
  CHECK(code_of([&] { ls::validate_scene(s); }) == ls::ErrorCode::config_error);
}

TEST_CASE("packet rate must cover the sweep band") {
  ls::SceneConfig scene = make_scene();
  CHECK(code_of([&] { ls::synth_trace(scene, 1500.0, 1); }) ==
        ls::ErrorCode::config_error);
}

TEST_CASE("ground truth curve interpolates its knots") {
  ls::GroundTruthCurve curve;
  curve.capacity_ml = 1800.0;
  curve.knot_levels_ml = {0.0, 900.0, 1800.0};
  curve.knot_freqs_hz = {900.0, 500.0, 300.0};
  CHECK_NOTHROW(ls::validate_curve(curve));
  CHECK(ls::curve_frequency(curve, 0.0) == doctest::Approx(900.0));
  CHECK(ls::curve_frequency(curve, 900.0) == doctest::Approx(500.0));
  CHECK(ls::curve_frequency(curve, 1800.0) == doctest::Approx(300.0));
  CHECK(ls::curve_frequency(curve, 450.0) == doctest::Approx(700.0));
  CHECK(ls::curve_frequency(curve, 1350.0) == doctest::Approx(400.0));

  CHECK(code_of([&] { ls::curve_frequency(curve, -1.0); }) ==
        ls::ErrorCode::domain_error);
  CHECK(code_of([&] { ls::curve_frequency(curve, 1801.0); }) ==
        ls::ErrorCode::domain_error);

  ls::GroundTruthCurve bad = curve;
  bad.knot_freqs_hz = {500.0, 600.0, 700.0};  // must decrease
  CHECK(code_of([&] { ls::validate_curve(bad); }) ==
        ls::ErrorCode::config_error);
  bad = curve;
  bad.knot_freqs_hz[0] = 1000.0;  // above freq_max
  CHECK(code_of([&] { ls::validate_curve(bad); }) ==
        ls::ErrorCode::config_error);
  bad = curve;
  bad.knot_levels_ml = {0.0, 900.0, 900.0};
  CHECK(code_of([&] { ls::validate_curve(bad); }) ==
        ls::ErrorCode::config_error);
}

TEST_CASE("dataset synthesis labels traces by sorted level") {
  ls::GroundTruthCurve curve;
  curve.knot_levels_ml = {0.0, 1800.0};
  curve.knot_freqs_hz = {900.0, 300.0};
  ls::SceneConfig scene = make_scene();
  scene.chirp.duration_s = 1.0;

  std::vector<double> levels = {1200.0, 400.0, 800.0};  // deliberately unsorted
  auto set = ls::synth_dataset(curve, scene, 2000.0, levels, 2, 9);
  REQUIRE(set.size() == 6);
  double prev_level = -1.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& item = set[i];
    CHECK(item.level_class == static_cast<int>(i / 2) + 1);
    CHECK(item.level_ml >= prev_level);
    if (i % 2 == 1) prev_level = item.level_ml;
    CHECK(item.resonance_hz ==
          doctest::Approx(ls::curve_frequency(curve, item.level_ml)));
    CHECK(item.trace.metadata.at("level_class") ==
          std::to_string(item.level_class));
    CHECK(item.trace.metadata.count("level_ml") == 1);
    CHECK(item.trace.metadata.count("resonance_hz") == 1);
  }
  CHECK(set[0].level_ml == 400.0);
  CHECK(set[2].level_ml == 800.0);
  CHECK(set[4].level_ml == 1200.0);

  // distinct seeds per (level, sweep), deterministic overall
  CHECK(trace_bytes(set[0].trace) != trace_bytes(set[1].trace));
  auto again = ls::synth_dataset(curve, scene, 2000.0, levels, 2, 9);
  CHECK(trace_bytes(set[3].trace) == trace_bytes(again[3].trace));

  CHECK(code_of([&] {
          ls::synth_dataset(curve, scene, 2000.0, {400.0, 400.0}, 2, 9);
        }) == ls::ErrorCode::config_error);
  CHECK(code_of([&] { ls::synth_dataset(curve, scene, 2000.0, {}, 2, 9); }) ==
        ls::ErrorCode::config_error);
}

TEST_CASE("scene json codec round trips") {
  ls::SceneConfig scene = make_scene();
  scene.noise_std = 0.02;
  scene.clock.enabled = true;
  scene.clock.walk_step_std_rad = 0.05;
  scene.clock.antenna_offsets_rad = {0.1, -0.2};
  scene.paths[1].antenna_gains = {1.0, 0.5};
  scene.vibration.second_mode = true;
  scene.padding_s = 1.5;

  std::string text = ls::scene_to_json(scene);
  ls::SceneConfig reread = ls::parse_scene_json(text);
  CHECK(ls::scene_to_json(reread) == text);
  CHECK(reread.n_rx == scene.n_rx);
  CHECK(reread.noise_std == scene.noise_std);
  CHECK(reread.clock.antenna_offsets_rad == scene.clock.antenna_offsets_rad);
  CHECK(reread.paths.size() == scene.paths.size());
  CHECK(reread.paths[1].antenna_gains == scene.paths[1].antenna_gains);
  CHECK(reread.vibration.second_mode == true);
  CHECK(reread.padding_s == 1.5);

  CHECK(code_of([] { ls::parse_scene_json("{oops"); }) ==
        ls::ErrorCode::config_error);
  CHECK(code_of([] { ls::load_scene_file("/nonexistent/scene.json"); }) ==
        ls::ErrorCode::io_error);
}

TEST_CASE("curve json codec round trips") {
  ls::GroundTruthCurve curve;
  curve.capacity_ml = 1800.0;
  curve.knot_levels_ml = {0.0, 600.0, 1800.0};
  curve.knot_freqs_hz = {880.0, 600.0, 310.0};
  std::string text = ls::curve_to_json(curve);
  ls::GroundTruthCurve reread = ls::parse_curve_json(text);
  CHECK(ls::curve_to_json(reread) == text);
  CHECK(reread.knot_levels_ml == curve.knot_levels_ml);
  CHECK(reread.knot_freqs_hz == curve.knot_freqs_hz);
  CHECK(reread.capacity_ml == curve.capacity_ml);
}
