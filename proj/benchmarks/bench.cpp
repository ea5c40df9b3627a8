#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "levelsense/classifier.hpp"
#include "levelsense/pipeline.hpp"
#include "levelsense/preprocess.hpp"
#include "levelsense/sim.hpp"
#include "levelsense/spectrogram.hpp"
#include "levelsense/spline.hpp"

namespace ls = levelsense;

namespace {

ls::SceneConfig bench_scene(double sweep_s) {
  ls::SceneConfig scene;
  scene.n_rx = 2;
  scene.n_subcarriers = 8;
  scene.chirp.duration_s = sweep_s;
  scene.vibration.resonance_hz = 400.0;
  scene.noise_std = 0.005;

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

Eigen::VectorXd two_tone(int n, double fs) {
  Eigen::VectorXd series(n);
  for (int i = 0; i < n; ++i) {
    double t = i / fs;
    series[i] = std::sin(2.0 * M_PI * 380.0 * t) + 0.4 * std::sin(2.0 * M_PI * 710.0 * t);
  }
  return series;
}

void bm_stft(benchmark::State& state) {
  const double fs = 2000.0;
  Eigen::VectorXd series = two_tone(static_cast<int>(state.range(0)), fs);
  ls::StftConfig cfg;
  for (auto _ : state) {
    ls::Spectrogram spec = ls::stft(series, cfg);
    benchmark::DoNotOptimize(spec.power.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_stft)->Arg(6000)->Arg(30000);

void bm_highpass(benchmark::State& state) {
  const double fs = 2000.0;
  Eigen::VectorXd series = two_tone(static_cast<int>(state.range(0)), fs);
  for (auto _ : state) {
    Eigen::VectorXd out = ls::highpass(series, 100.0, fs);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_highpass)->Arg(6000)->Arg(60000);

void bm_synth_trace(benchmark::State& state) {
  ls::SceneConfig scene = bench_scene(static_cast<double>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    ls::CsiTrace trace = ls::synth_trace(scene, 2000.0, seed++);
    benchmark::DoNotOptimize(trace.frames.data());
  }
}
BENCHMARK(bm_synth_trace)->Arg(3)->Arg(6);

void bm_run_pipeline(benchmark::State& state) {
  ls::SceneConfig scene = bench_scene(static_cast<double>(state.range(0)));
  ls::CsiTrace trace = ls::synth_trace(scene, 2000.0, 1);
  ls::PipelineConfig cfg;
  cfg.chirp = scene.chirp;
  for (auto _ : state) {
    ls::PipelineResult r = ls::run_pipeline(trace, cfg);
    benchmark::DoNotOptimize(r.estimate.f_resonance_hz);
  }
}
BENCHMARK(bm_run_pipeline)->Arg(3)->Arg(6);

void bm_fit_spline(benchmark::State& state) {
  std::vector<double> freqs, levels;
  const int n = static_cast<int>(state.range(0));
  for (int i = 0; i < n; ++i) {
    freqs.push_back(300.0 + 600.0 * i / (n - 1));
    levels.push_back(1800.0 - 1800.0 * i / (n - 1));
  }
  for (auto _ : state) {
    ls::SplineModel model = ls::fit_spline(freqs, levels, 1800.0);
    benchmark::DoNotOptimize(model.d.data());
  }
}
BENCHMARK(bm_fit_spline)->Arg(5)->Arg(20);

void bm_train_classifier(benchmark::State& state) {
  const int classes = 5, per = 10;
  Eigen::MatrixXd x(classes * per, 1);
  std::vector<int> y;
  for (int c = 0; c < classes; ++c) {
    for (int j = 0; j < per; ++j) {
      x(c * per + j, 0) = 300.0 + 120.0 * c + 1.5 * (j - per / 2);
      y.push_back(c + 1);
    }
  }
  for (auto _ : state) {
    ls::ClassifierModel model = ls::train_classifier(x, y);
    benchmark::DoNotOptimize(model.chosen_c);
  }
}
BENCHMARK(bm_train_classifier);

}  // namespace

BENCHMARK_MAIN();
