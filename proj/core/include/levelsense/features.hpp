#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "levelsense/chirp.hpp"
#include "levelsense/preprocess.hpp"
#include "levelsense/spectrogram.hpp"

namespace levelsense {

// Unwrapped, mean-removed phase per subcarrier: column c is the phase of
// values(:, c) unwrapped along time with its mean subtracted. Consecutive
// output samples never jump by pi or more.
Eigen::MatrixXd phase_series(const CombinedSeries& series);

struct PcaProjection {
  Eigen::VectorXd weights;            // unit norm, largest |entry| positive
  Eigen::VectorXd component;          // centered data projected on weights
  double explained_variance_ratio = 0.0;
};

// First principal component of the column-covariance of a (time x channels)
// matrix. Needs at least channels + 1 rows (ErrorCode::insufficient_data);
// an all-constant input is degenerate (ErrorCode::degenerate_input).
PcaProjection pca_first(const Eigen::MatrixXd& data);

struct Peak {
  double freq_hz = 0.0;   // quadratically refined
  double power = 0.0;     // at the peak bin, unrefined
  int bin = 0;
};

struct PeakConfig {
  double threshold_divisor = 3.0;   // keep maxima >= band max / divisor
  double min_spacing_hz = 200.0;    // stronger peak wins inside this window
  double band_min_hz = 100.0;       // search at or above this frequency
  double min_power = 1e-12;         // absolute floor; numerically silent
                                    // spectra yield no peaks at all
};

// Local maxima of a spectrum, strongest-first suppression inside
// min_spacing_hz (equal power resolves to the lower frequency), returned in
// ascending frequency with sub-bin quadratic refinement. No qualifying peak
// throws ErrorCode::no_peak.
std::vector<Peak> detect_peaks(const Eigen::VectorXd& freqs_hz,
                               const Eigen::VectorXd& power,
                               const PeakConfig& cfg);

struct ResonanceEstimate {
  double f_up_hz = 0.0;      // from the ascending sweep
  double f_down_hz = 0.0;    // from the descending sweep
  double f_resonance_hz = 0.0;  // (f_up + f_down) / 2
  double peak_power_up = 0.0;
  double peak_power_down = 0.0;
  double quality = 0.0;      // peak power over median in-band power
};

struct ResonanceConfig {
  PeakConfig peaks;
  double crosscheck_bins = 2.0;  // max-power cell vs averaged-spectrum peak
};

// Bidirectional estimate: first retained peak of each sweep's time-averaged
// spectrum, midpoint of the two. The sweeps must mirror each other
// (ErrorCode::mode_mismatch when rates or bands disagree). Optional masks
// select the spectrogram windows that enter the statistics. A direction
// whose strongest time-frequency cell sits more than crosscheck_bins away
// from its averaged-spectrum peak halves the quality score.
ResonanceEstimate estimate_resonance(const Spectrogram& spec_up,
                                     const Spectrogram& spec_down,
                                     const ChirpConfig& chirp_up,
                                     const ChirpConfig& chirp_down,
                                     const ResonanceConfig& cfg,
                                     const std::vector<bool>& mask_up = {},
                                     const std::vector<bool>& mask_down = {});

}  // namespace levelsense
