#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levelsense/chirp.hpp"
#include "levelsense/features.hpp"
#include "levelsense/preprocess.hpp"
#include "levelsense/spectrogram.hpp"
#include "levelsense/trace.hpp"

namespace levelsense {

// Trace -> resonance frequency, end to end: antenna pair selection,
// conjugate multiplication, per-subcarrier phase extraction, zero-phase
// high-pass of each phase series, principal-component combination, per-sweep
// STFT, optional background subtraction, bidirectional peak estimate.
struct PipelineConfig {
  ChirpConfig chirp;            // ascending sweep; descending is its mirror
  double padding_s = 0.0;       // leading silence in the session
  double highpass_cutoff_hz = 100.0;
  StftConfig stft;              // sample_rate is taken from the trace
  PeakConfig peaks;
  double crosscheck_bins = 2.0;
  double edge_trim_s = 0.25;    // windows touching the series edges are dropped
  std::optional<std::pair<int, int>> fixed_pair;  // bypass select_pair
};

struct PipelineResult {
  ResonanceEstimate estimate;
  int antenna_l = 0;
  int antenna_s = 0;
  double explained_variance_ratio = 0.0;
  Spectrogram spec_up;
  Spectrogram spec_down;
  std::vector<std::string> warnings;
};

// baseline, when present, is a no-excitation capture of the same scene; its
// time-averaged spectrum (through the same pair/filter/projection) is
// subtracted from both sweep spectrograms. Without one, the leading padding
// serves as baseline when long enough, otherwise subtraction is skipped with
// a warning. Throws ErrorCode::no_peak when no sweep shows a qualifying
// peak, and propagates trace/config errors.
PipelineResult run_pipeline(const CsiTrace& trace, const PipelineConfig& cfg,
                            const CsiTrace* baseline = nullptr);

// The principal component of the whole session's combined phase, plus the
// sample range [begin, end) of each sweep. Shared by run_pipeline and the
// spectrogram export.
struct SessionComponent {
  Eigen::VectorXd component;
  int antenna_l = 0;
  int antenna_s = 0;
  double explained_variance_ratio = 0.0;
  Eigen::VectorXd pca_weights;
  std::ptrdiff_t up_begin = 0, up_end = 0;
  std::ptrdiff_t down_begin = 0, down_end = 0;
};

SessionComponent session_component(const CsiTrace& trace,
                                   const PipelineConfig& cfg);

}  // namespace levelsense
