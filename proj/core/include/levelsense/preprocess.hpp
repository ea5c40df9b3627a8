#pragma once

#include <Eigen/Dense>
#include <utility>

#include "levelsense/spectrogram.hpp"
#include "levelsense/trace.hpp"

namespace levelsense {

// Per-subcarrier conjugate product of two antennas' series. Common-mode
// phase (clock walk, common offsets) cancels exactly in the product.
struct CombinedSeries {
  Eigen::MatrixXcd values;  // n_frames x n_subcarriers
  double sample_rate_hz = 0.0;
  int antenna_l = 0;
  int antenna_s = 0;
};

// values(t, c) = H[l](t, c) * conj(H[s](t, c)). l == s or an out-of-range
// antenna throws ErrorCode::domain_error; needs n_rx >= 2.
CombinedSeries conjugate_multiply(const CsiTrace& trace, int antenna_l,
                                  int antenna_s);

// Score used by select_pair: total spectral power of the mean-removed
// unwrapped phase across subcarriers, restricted to [band_lo, band_hi].
double pair_band_power(const CombinedSeries& series, double band_lo_hz,
                       double band_hi_hz);

// Scans all antenna pairs and returns the one whose conjugate product has
// the largest in-band phase power; ties break to the smallest (l, s). The
// band defaults to [highpass cutoff, top of the excitation sweep].
std::pair<int, int> select_pair(const CsiTrace& trace, double band_lo_hz,
                                double band_hi_hz);

// Zero-phase (forward-backward) 4th-order Butterworth high-pass, applied to
// real and imaginary parts independently. Cutoff must sit in
// (0, sample_rate / 2). Linear in its input.
Eigen::MatrixXcd highpass(const Eigen::MatrixXcd& values, double cutoff_hz,
                          double sample_rate_hz);
Eigen::VectorXd highpass(const Eigen::VectorXd& series, double cutoff_hz,
                         double sample_rate_hz);

// Removes stationary background: subtracts the baseline's time-mean power
// per frequency bin, clamping at zero. Grids must match
// (ErrorCode::dimension_mismatch).
Spectrogram spectral_subtract(const Spectrogram& signal,
                              const Spectrogram& baseline);

}  // namespace levelsense
