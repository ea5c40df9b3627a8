#include "levelsense/preprocess.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "detail.hpp"
#include "levelsense/errors.hpp"

namespace levelsense {

namespace {

struct Biquad {
  double b0, b1, b2;  // a0 normalized to 1
  double a1, a2;
};

// 4th-order Butterworth high-pass as two cascaded biquads, derived from the
// analog prototype pole pairs through the prewarped bilinear transform.
std::array<Biquad, 2> design_highpass(double cutoff_hz, double fs) {
  const double pi = 3.14159265358979323846;
  const double K = 2.0 * fs;
  const double wc = 2.0 * fs * std::tan(pi * cutoff_hz / fs);
  const double pole_angles[2] = {5.0 * pi / 8.0, 7.0 * pi / 8.0};
  std::array<Biquad, 2> sections{};
  for (int i = 0; i < 2; ++i) {
    double re_p = std::cos(pole_angles[i]);
    double a0 = K * K - 2.0 * re_p * wc * K + wc * wc;
    sections[i].b0 = K * K / a0;
    sections[i].b1 = -2.0 * K * K / a0;
    sections[i].b2 = K * K / a0;
    sections[i].a1 = (-2.0 * K * K + 2.0 * wc * wc) / a0;
    sections[i].a2 = (K * K + 2.0 * re_p * wc * K + wc * wc) / a0;
  }
  return sections;
}

void filter_inplace(Eigen::VectorXd& x, const std::array<Biquad, 2>& sections) {
  for (const Biquad& s : sections) {
    double z1 = 0.0, z2 = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double in = x[i];
      double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      x[i] = out;
    }
  }
}

// Forward-backward pass over an odd-reflected extension of the series; the
// reflection keeps the construction linear while pushing filter transients
// into the padding.
Eigen::VectorXd filtfilt(const Eigen::VectorXd& x,
                         const std::array<Biquad, 2>& sections) {
  const Eigen::Index n = x.size();
  const Eigen::Index pad = std::min<Eigen::Index>(512, n - 1);
  Eigen::VectorXd ext(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i)
    ext[i] = 2.0 * x[0] - x[pad - i];
  ext.segment(pad, n) = x;
  for (Eigen::Index i = 0; i < pad; ++i)
    ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  filter_inplace(ext, sections);
  ext.reverseInPlace();
  filter_inplace(ext, sections);
  ext.reverseInPlace();
  return ext.segment(pad, n);
}

void check_cutoff(double cutoff_hz, double fs) {
  if (!(fs > 0.0))
    raise(ErrorCode::config_error, "sample rate must be positive");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs / 2.0))
    raise(ErrorCode::config_error,
          "high-pass cutoff " + std::to_string(cutoff_hz) +
              " Hz must lie inside (0, " + std::to_string(fs / 2.0) + ")");
}

}  // namespace

CombinedSeries conjugate_multiply(const CsiTrace& trace, int antenna_l,
                                  int antenna_s) {
  if (trace.n_rx < 2)
    raise(ErrorCode::insufficient_data,
          "conjugate multiplication needs at least two antennas");
  if (antenna_l == antenna_s)
    raise(ErrorCode::domain_error,
          "conjugate multiplication needs two distinct antennas");
  if (antenna_l < 0 || antenna_l >= trace.n_rx || antenna_s < 0 ||
      antenna_s >= trace.n_rx)
    raise(ErrorCode::domain_error,
          "antenna index out of range for n_rx = " +
              std::to_string(trace.n_rx));

  CombinedSeries out;
  out.sample_rate_hz = trace.packet_rate_hz;
  out.antenna_l = antenna_l;
  out.antenna_s = antenna_s;
  out.values.resize(static_cast<Eigen::Index>(trace.frames.size()),
                    trace.n_subcarriers);
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const auto& v = trace.frames[i].values;
    for (int c = 0; c < trace.n_subcarriers; ++c) {
      std::complex<double> l{v(antenna_l, c)};
      std::complex<double> s{v(antenna_s, c)};
      out.values(static_cast<Eigen::Index>(i), c) = l * std::conj(s);
    }
  }
  return out;
}

double pair_band_power(const CombinedSeries& series, double band_lo_hz,
                       double band_hi_hz) {
  const Eigen::Index n = series.values.rows();
  if (n < 4)
    raise(ErrorCode::insufficient_data,
          "too few frames to score an antenna pair");
  const double df = series.sample_rate_hz / static_cast<double>(n);
  double total = 0.0;
  Eigen::VectorXd phase(n);
  for (Eigen::Index c = 0; c < series.values.cols(); ++c) {
    for (Eigen::Index t = 0; t < n; ++t)
      phase[t] = std::arg(series.values(t, c));
    detail::unwrap_inplace(phase);
    phase.array() -= phase.mean();
    Eigen::VectorXcd spec = detail::rfft(phase);
    for (Eigen::Index k = 0; k < spec.size(); ++k) {
      double f = df * static_cast<double>(k);
      if (f >= band_lo_hz && f <= band_hi_hz) total += std::norm(spec[k]);
    }
  }
  return total;
}

std::pair<int, int> select_pair(const CsiTrace& trace, double band_lo_hz,
                                double band_hi_hz) {
  if (trace.n_rx < 2)
    raise(ErrorCode::insufficient_data,
          "antenna pair selection needs at least two antennas");
  if (trace.n_rx == 2) return {0, 1};

  // Swapping the pair conjugates the product and negates its phase, leaving
  // the power unchanged, so only l < s needs scoring; scanning in
  // lexicographic order makes ties resolve to the smallest pair.
  std::pair<int, int> best{0, 1};
  double best_score = -1.0;
  for (int l = 0; l < trace.n_rx; ++l) {
    for (int s = l + 1; s < trace.n_rx; ++s) {
      double score = pair_band_power(conjugate_multiply(trace, l, s),
                                     band_lo_hz, band_hi_hz);
      if (score > best_score) {
        best_score = score;
        best = {l, s};
      }
    }
  }
  return best;
}

Eigen::VectorXd highpass(const Eigen::VectorXd& series, double cutoff_hz,
                         double sample_rate_hz) {
  check_cutoff(cutoff_hz, sample_rate_hz);
  if (series.size() < 4)
    raise(ErrorCode::insufficient_data, "series too short to filter");
  return filtfilt(series, design_highpass(cutoff_hz, sample_rate_hz));
}

Eigen::MatrixXcd highpass(const Eigen::MatrixXcd& values, double cutoff_hz,
                          double sample_rate_hz) {
  check_cutoff(cutoff_hz, sample_rate_hz);
  if (values.rows() < 4)
    raise(ErrorCode::insufficient_data, "series too short to filter");
  auto sections = design_highpass(cutoff_hz, sample_rate_hz);
  Eigen::MatrixXcd out(values.rows(), values.cols());
  Eigen::VectorXd part(values.rows());
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    part = values.col(c).real();
    Eigen::VectorXd re = filtfilt(part, sections);
    part = values.col(c).imag();
    Eigen::VectorXd im = filtfilt(part, sections);
    for (Eigen::Index t = 0; t < values.rows(); ++t)
      out(t, c) = {re[t], im[t]};
  }
  return out;
}

Spectrogram spectral_subtract(const Spectrogram& signal,
                              const Spectrogram& baseline) {
  if (baseline.power.rows() < 1)
    raise(ErrorCode::insufficient_data, "baseline spectrogram is empty");
  if (signal.freq_bins_hz.size() != baseline.freq_bins_hz.size() ||
      signal.sample_rate_hz != baseline.sample_rate_hz ||
      ((signal.freq_bins_hz - baseline.freq_bins_hz).cwiseAbs().maxCoeff() >
       1e-9))
    raise(ErrorCode::dimension_mismatch,
          "signal and baseline spectrograms use different frequency grids");

  Spectrogram out = signal;
  Eigen::RowVectorXd mean = baseline.power.colwise().mean();
  out.power = (signal.power.rowwise() - mean).cwiseMax(0.0);
  return out;
}

}  // namespace levelsense
