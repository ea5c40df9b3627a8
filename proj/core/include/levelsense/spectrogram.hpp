#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace levelsense {

// Short-time power spectrum: power(w, k) is |X|^2 of window w at frequency
// bin k. Bin spacing is sample_rate / fft_len; time stamps are window
// centers relative to the start of the analyzed series.
struct Spectrogram {
  Eigen::VectorXd freq_bins_hz;
  Eigen::VectorXd time_bins_s;
  Eigen::MatrixXd power;  // n_windows x n_freq_bins
  double sample_rate_hz = 0.0;
  int window_len = 0;
  int hop = 0;

  double bin_spacing_hz() const {
    return freq_bins_hz.size() > 1 ? freq_bins_hz[1] - freq_bins_hz[0] : 0.0;
  }
};

struct StftConfig {
  int window_len = 2048;
  int overlap = 2000;  // hop = window_len - overlap
  double sample_rate_hz = 2000.0;
};

// Hamming-windowed STFT of a real series. Requires series length >=
// window_len and 0 <= overlap < window_len (ErrorCode::insufficient_data /
// config_error otherwise). Windows are independent of each other, and the
// result is deterministic for identical inputs.
Spectrogram stft(const Eigen::VectorXd& series, const StftConfig& cfg);

// Mean power per frequency bin across a subset of windows (all windows when
// the mask is empty). Mask length, when given, must equal the window count.
Eigen::VectorXd time_averaged_spectrum(const Spectrogram& spec,
                                       const std::vector<bool>& mask = {});

// CSV: header row carries the frequency bins, first column the window times.
void write_spectrogram_csv(const Spectrogram& spec, std::ostream& out);
void write_spectrogram_csv(const Spectrogram& spec, const std::string& path);

}  // namespace levelsense
