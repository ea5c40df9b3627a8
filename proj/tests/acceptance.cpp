// End-to-end acceptance checks. Each check prints one [PASS]/[FAIL] line
// with the measured values; the exit code is nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "levelsense/chirp.hpp"
#include "levelsense/classifier.hpp"
#include "levelsense/dataset.hpp"
#include "levelsense/eval.hpp"
#include "levelsense/features.hpp"
#include "levelsense/model_io.hpp"
#include "levelsense/pipeline.hpp"
#include "levelsense/preprocess.hpp"
#include "levelsense/rng.hpp"
#include "levelsense/sim.hpp"
#include "levelsense/spectrogram.hpp"
#include "levelsense/spline.hpp"
#include "levelsense/trace_io.hpp"

namespace ls = levelsense;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Complex sample noise giving a per-sweep resonance estimate std comfortably
// under 2 Hz; the discrete-levels check measures and enforces that bound.
// Calibrated on the quiet_scene geometry: 0.003 keeps the worst per-level
// std near 1.7 Hz, 0.004 lets one level reach 2.4 Hz (bin flips at the peak
// dominate there, so the spread shrinks slowly with noise), and 0.01 buries
// the chirp crossing in the phase noise outright.
constexpr double kCalibratedNoiseStd = 0.003;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

ls::SceneConfig quiet_scene() {
  ls::SceneConfig scene;
  scene.n_rx = 2;
  scene.n_subcarriers = 8;
  scene.vibration.resonance_hz = 400.0;
  scene.vibration.response_lag_s = 0.0;
  scene.clock.enabled = false;

  // Broadside direct path, quarter-wave stepped reflection: the antennas
  // see the vibration with different phase sensitivity, so the conjugate
  // product keeps a strong copy of it.
  ls::PathSpec los;
  los.length_m = 2.0;
  los.arrival_cos = 0.0;
  ls::PathSpec surface;
  surface.length_m = 2.4;
  surface.attenuation = 0.6;
  surface.dynamic = true;
  surface.incidence_rad = 0.3;
  surface.reflection_rad = 0.3;
  surface.arrival_cos = 0.5;
  scene.paths = {los, surface};
  return scene;
}

double stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Every resonance on the 10 Hz grid across the sensing band must come back
// within two analysis bins, and the whole sweep must stay under a minute.
Outcome check_band_sweep() {
  auto t0 = std::chrono::steady_clock::now();
  ls::SceneConfig scene = quiet_scene();
  ls::PipelineConfig cfg;
  double worst = 0.0, worst_at = 0.0;
  int n = 0;
  for (int f_r = 170; f_r <= 900; f_r += 10, ++n) {
    scene.vibration.resonance_hz = f_r;
    ls::CsiTrace trace = ls::synth_trace(scene, 2000.0, 1000 + f_r);
    double est = ls::run_pipeline(trace, cfg).estimate.f_resonance_hz;
    double err = std::abs(est - f_r);
    if (err > worst) {
      worst = err;
      worst_at = f_r;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool pass = n == 74 && worst <= 1.95 && secs < 60.0;
  return {pass, fmt("%d resonances 170..900 Hz, worst |error| %.3f Hz at %.0f Hz"
                    " (limit 1.95), %.1f s (limit 60)",
                    n, worst, worst_at, secs)};
}

// A lagged surface response shifts each sweep direction by sweep_rate * lag;
// the midpoint of the two directions must stay unbiased.
Outcome check_lag_bias() {
  ls::SceneConfig scene = quiet_scene();
  scene.vibration.response_lag_s = 0.05;
  ls::PipelineConfig cfg;
  const double shift = ls::sweep_rate(cfg.chirp) * 0.05;
  ls::SplitMix64 rng(20260819);
  double worst_up = 0.0, worst_down = 0.0, worst_mid = 0.0;
  for (int i = 0; i < 20; ++i) {
    double f_r = 250.0 + 550.0 * rng.next_double();
    scene.vibration.resonance_hz = f_r;
    ls::CsiTrace trace = ls::synth_trace(scene, 2000.0, 4000 + i);
    ls::ResonanceEstimate est = ls::run_pipeline(trace, cfg).estimate;
    worst_up = std::max(worst_up, std::abs(est.f_up_hz - f_r - shift));
    worst_down = std::max(worst_down, std::abs(f_r - est.f_down_hz - shift));
    worst_mid = std::max(worst_mid, std::abs(est.f_resonance_hz - f_r));
  }
  bool pass = worst_up <= 1.0 && worst_down <= 1.0 && worst_mid <= 1.95;
  return {pass, fmt("20 resonances, lag 0.05 s: up/down offsets within %.2f/%.2f Hz"
                    " of %.2f Hz (limit 1.00), worst midpoint error %.3f Hz (limit 1.95)",
                    worst_up, worst_down, shift, worst_mid)};
}

// Ten levels 60 Hz apart, ten noisy sweeps each, random half/half split per
// level: the per-level estimate spread must stay under 2 Hz and a classifier
// trained on the estimates must reach weighted F >= 0.95 on the held-out half.
Outcome check_discrete_levels() {
  ls::GroundTruthCurve curve;
  curve.knot_levels_ml = {0.0, 1800.0};
  curve.knot_freqs_hz = {900.0, 300.0};
  ls::SceneConfig scene = quiet_scene();
  scene.noise_std = kCalibratedNoiseStd;
  scene.clock.enabled = true;
  scene.vibration.response_lag_s = 0.05;
  scene.chirp.duration_s = 6.0;
  std::vector<double> levels;
  for (int i = 1; i <= 10; ++i) levels.push_back(1800.0 * i / 10.0);
  std::vector<ls::LabeledTrace> data =
      ls::synth_dataset(curve, scene, 2000.0, levels, 10, 42);

  ls::PipelineConfig cfg;
  cfg.chirp = scene.chirp;
  std::vector<double> estimates;
  std::vector<int> classes;
  std::map<int, std::vector<double>> by_class;
  for (const ls::LabeledTrace& lt : data) {
    double f = ls::run_pipeline(lt.trace, cfg).estimate.f_resonance_hz;
    estimates.push_back(f);
    classes.push_back(lt.level_class);
    by_class[lt.level_class].push_back(f);
  }
  double max_std = 0.0;
  for (const auto& [cls, v] : by_class) max_std = std::max(max_std, stddev(v));

  ls::SplitIndices split = ls::split_half_per_class(classes, 7);
  Eigen::MatrixXd x_train(split.train.size(), 1);
  std::vector<int> y_train;
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    x_train(static_cast<Eigen::Index>(i), 0) = estimates[split.train[i]];
    y_train.push_back(classes[split.train[i]]);
  }
  ls::ClassifierModel model = ls::train_classifier(x_train, y_train);

  Eigen::MatrixXd x_test(split.test.size(), 1);
  std::vector<int> y_test;
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    x_test(static_cast<Eigen::Index>(i), 0) = estimates[split.test[i]];
    y_test.push_back(classes[split.test[i]]);
  }
  ls::DiscreteReport rep = ls::evaluate_discrete(ls::predict_discrete(model, x_test), y_test);

  bool pass = max_std <= 2.0 && rep.weighted_f_score >= 0.95;
  return {pass, fmt("noise std %.3f: worst per-level estimate std %.2f Hz (limit 2.00),"
                    " weighted F %.3f over %zu held-out sweeps (limit 0.95)",
                    kCalibratedNoiseStd, max_std, rep.weighted_f_score, split.test.size())};
}

// Spline through the odd plus top training levels of a 300 Hz curve span:
// interpolated levels on the held-out even levels must average >= 0.97
// accuracy of full scale.
Outcome check_continuous_levels() {
  ls::GroundTruthCurve curve;
  curve.knot_levels_ml = {0.0, 1800.0};
  curve.knot_freqs_hz = {600.0, 300.0};
  ls::SceneConfig scene = quiet_scene();
  scene.noise_std = kCalibratedNoiseStd;
  scene.clock.enabled = true;
  scene.vibration.response_lag_s = 0.05;
  scene.chirp.duration_s = 6.0;
  std::vector<double> levels;
  for (int i = 1; i <= 10; ++i) levels.push_back(1800.0 * i / 10.0);
  std::vector<ls::LabeledTrace> data =
      ls::synth_dataset(curve, scene, 2000.0, levels, 6, 43);

  ls::PipelineConfig cfg;
  cfg.chirp = scene.chirp;
  std::vector<double> estimates;
  std::vector<int> classes;
  for (const ls::LabeledTrace& lt : data) {
    estimates.push_back(ls::run_pipeline(lt.trace, cfg).estimate.f_resonance_hz);
    classes.push_back(lt.level_class);
  }

  ls::SplitIndices split = ls::split_by_level(classes);
  std::vector<double> train_f, train_l;
  for (std::size_t idx : split.train) {
    train_f.push_back(estimates[idx]);
    train_l.push_back(data[idx].level_ml);
  }
  std::vector<double> knot_f, knot_l;
  ls::average_per_level(train_f, train_l, knot_f, knot_l);
  ls::SplineModel model = ls::fit_spline(knot_f, knot_l, curve.capacity_ml);

  std::vector<double> predicted, truth;
  for (std::size_t idx : split.test) {
    predicted.push_back(ls::predict_continuous(model, estimates[idx]).level_ml);
    truth.push_back(data[idx].level_ml);
  }
  ls::ContinuousReport rep = ls::evaluate_continuous(predicted, truth, curve.capacity_ml);

  bool pass = model.knots_hz.size() == 5 && rep.mean_accuracy >= 0.97;
  return {pass, fmt("300 Hz curve span, %zu-knot fit from levels {1,3,5,7,10},"
                    " mean accuracy %.4f over %zu held-out sweeps (limit 0.97)",
                    model.knots_hz.size(), rep.mean_accuracy, truth.size())};
}

// A common-phase random walk on the pi scale plus static per-antenna offsets
// must leave the projected component and the estimate where the clean trace
// puts them, up to single-precision storage rounding.
Outcome check_clock_invariance() {
  ls::SceneConfig clean = quiet_scene();
  clean.chirp.duration_s = 6.0;
  ls::SceneConfig walked = clean;
  walked.clock.enabled = true;
  const double n_frames = 2.0 * clean.chirp.duration_s * 2000.0;
  walked.clock.walk_step_std_rad = kPi / std::sqrt(n_frames);
  walked.clock.antenna_offsets_rad = {0.4, -0.9};

  ls::CsiTrace a = ls::synth_trace(clean, 2000.0, 99);
  ls::CsiTrace b = ls::synth_trace(walked, 2000.0, 99);
  ls::PipelineConfig cfg;
  cfg.chirp = clean.chirp;
  ls::SessionComponent ca = ls::session_component(a, cfg);
  ls::SessionComponent cb = ls::session_component(b, cfg);
  double scale = ca.component.cwiseAbs().maxCoeff();
  double diff = (ca.component - cb.component).cwiseAbs().maxCoeff();
  double f_a = ls::run_pipeline(a, cfg).estimate.f_resonance_hz;
  double f_b = ls::run_pipeline(b, cfg).estimate.f_resonance_hz;

  bool pass = diff <= 1e-4 * std::max(1.0, scale) &&
              std::abs(f_a - f_b) <= 1e-3 && std::abs(f_a - 400.0) <= 2.5;
  return {pass, fmt("walk step %.4f rad over %.0f frames: component delta %.2e"
                    " (scale %.2e, limit 1e-4), |delta f| %.2e Hz (limit 1e-3), f %.2f Hz",
                    walked.clock.walk_step_std_rad, n_frames, diff, scale,
                    std::abs(f_a - f_b), f_a)};
}

// Pinned arithmetic: default sweep rate, analysis bin spacing, the gap to the
// second vibration mode, and the phase swing of a 0.95 mm path change.
Outcome check_constants() {
  ls::ChirpConfig chirp;
  double rate = ls::sweep_rate(chirp);
  bool ok_rate = chirp.f_start_hz == 0.0 && chirp.f_end_hz == 1000.0 &&
                 chirp.duration_s == 15.0 &&
                 std::abs(rate - 1000.0 / 15.0) <= 1e-9 &&
                 std::abs(rate - 66.67) <= 0.005;

  ls::StftConfig stft_cfg;
  Eigen::VectorXd series(2048);
  for (int i = 0; i < series.size(); ++i)
    series[i] = std::sin(2.0 * kPi * 50.0 * i / stft_cfg.sample_rate_hz);
  ls::Spectrogram spec = ls::stft(series, stft_cfg);
  double spacing = spec.bin_spacing_hz();
  bool ok_bins = spec.freq_bins_hz.size() == 1025 &&
                 std::abs(spacing - 0.9765625) <= 1e-12 &&
                 std::abs(spacing - 0.98) <= 0.004;

  double gap = 170.0 * ls::kSecondModeFreqRatio - 170.0;
  ls::PeakConfig peaks;
  bool ok_gap = std::abs(gap - 212.5) <= 1e-9 && peaks.min_spacing_hz < gap;

  ls::SceneConfig s;
  s.n_rx = 1;
  s.n_subcarriers = 1;
  s.paths.resize(1);
  s.paths[0].length_m = 2.0;
  std::complex<double> v1(ls::synth_frame(s, 0.0, 1, 0).values(0, 0));
  s.paths[0].length_m = 2.0 + 0.95e-3;
  std::complex<double> v2(ls::synth_frame(s, 0.0, 1, 0).values(0, 0));
  double swing = std::abs(std::arg(v2 * std::conj(v1)));
  double expected = 2.0 * kPi * 0.95e-3 / s.carrier_wavelength_m;
  bool ok_swing = std::abs(swing - expected) <= 0.01 * expected &&
                  std::abs(expected - 0.0995) <= 0.01 * 0.0995;

  bool pass = ok_rate && ok_bins && ok_gap && ok_swing;
  return {pass, fmt("sweep rate %.4f Hz/s, bin spacing %.7f Hz, second-mode gap"
                    " %.1f Hz (suppression window %.0f), 0.95 mm swing %.5f rad"
                    " (expect 0.0995)",
                    rate, spacing, gap, peaks.min_spacing_hz, swing)};
}

// Component-level properties: spline exactness and smoothness, high-pass
// rejection, rank-one recovery, pairwise classifier structure, and
// byte-identical serialization round trips.
Outcome check_properties() {
  std::vector<std::string> fails;

  std::vector<double> xs = {170.0, 280.0, 410.0, 600.0, 900.0};
  std::vector<double> ys = {1800.0, 1240.0, 830.0, 420.0, 60.0};
  ls::SplineModel spline = ls::fit_spline(xs, ys, 1800.0);
  {
    double res = 0.0, c1 = 0.0, c2 = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      double h = xs[i + 1] - xs[i];
      double end = spline.a[i] + h * (spline.b[i] + h * (spline.c[i] + h * spline.d[i]));
      res = std::max(res, std::abs(spline.a[i] - ys[i]) / std::max(1.0, std::abs(ys[i])));
      res = std::max(res, std::abs(end - ys[i + 1]) / std::max(1.0, std::abs(ys[i + 1])));
      if (i + 2 < xs.size()) {
        double d1 = spline.b[i] + h * (2.0 * spline.c[i] + 3.0 * h * spline.d[i]);
        double d2 = 2.0 * spline.c[i] + 6.0 * h * spline.d[i];
        c1 = std::max(c1, std::abs(d1 - spline.b[i + 1]) /
                              std::max(1.0, std::abs(spline.b[i + 1])));
        c2 = std::max(c2, std::abs(d2 - 2.0 * spline.c[i + 1]) /
                              std::max(1.0, std::abs(2.0 * spline.c[i + 1])));
      }
    }
    if (!(res <= 1e-9 && c1 <= 1e-6 && c2 <= 1e-6))
      fails.push_back(fmt("spline residual %.1e C1 %.1e C2 %.1e", res, c1, c2));
  }

  {
    const double fs = 2000.0;
    const int n = 8192;
    Eigen::VectorXd dc = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd tone(n);
    for (int i = 0; i < n; ++i) tone[i] = std::sin(2.0 * kPi * 10.0 * i / fs);
    double dc_amp = ls::highpass(dc, 100.0, fs).segment(n / 4, n / 2).cwiseAbs().maxCoeff();
    double tone_amp = ls::highpass(tone, 100.0, fs).segment(n / 4, n / 2).cwiseAbs().maxCoeff();
    double dc_db = -20.0 * std::log10(std::max(dc_amp, 1e-300));
    double tone_db = -20.0 * std::log10(std::max(tone_amp, 1e-300));
    if (!(dc_db >= 120.0 && tone_db >= 40.0))
      fails.push_back(fmt("high-pass rejection dc %.0f dB, 10 Hz %.0f dB", dc_db, tone_db));
  }

  {
    const int n = 200;
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = std::sin(0.07 * i) + 0.3 * std::sin(0.5 * i);
    Eigen::VectorXd w(4);
    w << 0.8, -0.4, 0.2, 0.4;
    w.normalize();
    Eigen::VectorXd offsets(4);
    offsets << 3.0, -1.0, 0.5, 7.0;
    Eigen::MatrixXd data = s * w.transpose() + Eigen::VectorXd::Ones(n) * offsets.transpose();
    ls::PcaProjection p = ls::pca_first(data);
    Eigen::VectorXd centered = s.array() - s.mean();
    double w_err = (p.weights - w).cwiseAbs().maxCoeff();
    double c_err = (p.component - centered).cwiseAbs().maxCoeff();
    if (!(p.explained_variance_ratio >= 1.0 - 1e-12 && w_err <= 1e-9 && c_err <= 1e-9))
      fails.push_back(fmt("rank-one recovery evr %.12f w_err %.1e c_err %.1e",
                          p.explained_variance_ratio, w_err, c_err));
  }

  ls::ClassifierModel clf;
  {
    const int per = 8;
    Eigen::MatrixXd x(3 * per, 1);
    std::vector<int> y;
    const double centers[] = {-5.0, 0.0, 5.0};
    const int labels[] = {2, 5, 9};
    for (int c = 0; c < 3; ++c) {
      for (int j = 0; j < per; ++j) {
        x(c * per + j, 0) = centers[c] + (j - (per - 1) / 2.0) * 0.2;
        y.push_back(labels[c]);
      }
    }
    clf = ls::train_classifier(x, y);
    bool structure = clf.pairs.size() == 3 &&
                     clf.pairs[0].class_a == 2 && clf.pairs[0].class_b == 5 &&
                     clf.pairs[1].class_a == 2 && clf.pairs[1].class_b == 9 &&
                     clf.pairs[2].class_a == 5 && clf.pairs[2].class_b == 9;
    std::vector<int> pred = ls::predict_discrete(clf, x);
    int errors = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (pred[i] != y[i]) ++errors;
    if (!(structure && errors == 0))
      fails.push_back(fmt("classifier pairs %zu training errors %d", clf.pairs.size(), errors));
  }

  int round_trips = 0;
  {
    int bad = 0;
    ls::SceneConfig scene = quiet_scene();
    scene.chirp.duration_s = 0.5;
    scene.noise_std = 0.01;
    ls::CsiTrace trace = ls::synth_trace(scene, 2000.0, 5);
    trace.metadata["note"] = "round trip";
    for (ls::TraceFormat format : {ls::TraceFormat::binary, ls::TraceFormat::jsonl}) {
      std::ostringstream first;
      ls::write_trace(trace, first, format);
      std::istringstream in(first.str());
      std::ostringstream second;
      ls::write_trace(ls::read_trace(in, format), second, format);
      ++round_trips;
      if (first.str().empty() || first.str() != second.str()) ++bad;
    }

    std::string sj = ls::model_to_json(spline);
    ++round_trips;
    if (sj != ls::model_to_json(std::get<ls::SplineModel>(ls::parse_model_json(sj)))) ++bad;
    std::string cj = ls::model_to_json(clf);
    ++round_trips;
    if (cj != ls::model_to_json(std::get<ls::ClassifierModel>(ls::parse_model_json(cj)))) ++bad;

    std::string scene_json = ls::scene_to_json(scene);
    ++round_trips;
    if (scene_json != ls::scene_to_json(ls::parse_scene_json(scene_json))) ++bad;
    ls::GroundTruthCurve curve;
    curve.knot_levels_ml = {0.0, 900.0, 1800.0};
    curve.knot_freqs_hz = {880.0, 500.0, 310.0};
    std::string curve_json = ls::curve_to_json(curve);
    ++round_trips;
    if (curve_json != ls::curve_to_json(ls::parse_curve_json(curve_json))) ++bad;

    if (bad > 0) fails.push_back(fmt("%d of %d round trips differ", bad, round_trips));
  }

  if (fails.empty())
    return {true, fmt("spline exact and smooth, high-pass rejection, rank-one"
                      " recovery, pairwise structure, %d byte-identical round trips",
                      round_trips)};
  std::string detail;
  for (std::size_t i = 0; i < fails.size(); ++i)
    detail += (i ? "; " : "") + fails[i];
  return {false, detail};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*fn)();
  };
  const Entry checks[] = {
      {"band sweep accuracy", check_band_sweep},
      {"lag splits the sweep directions", check_lag_bias},
      {"discrete level classification", check_discrete_levels},
      {"continuous level interpolation", check_continuous_levels},
      {"clock offset invariance", check_clock_invariance},
      {"pinned constants", check_constants},
      {"component properties", check_properties},
  };

  int failures = 0;
  for (const Entry& e : checks) {
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o = {false, std::string("unexpected exception: ") + ex.what()};
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", e.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
