#include "levelsense/spectrogram.hpp"

#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <mutex>
#include <string>

#include "detail.hpp"
#include "levelsense/errors.hpp"

namespace levelsense {

namespace {

// FFTW's planner is not thread safe; plan creation and destruction are
// serialized, execution is not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct RfftPlan {
  fftw_plan plan = nullptr;
  double* in = nullptr;
  fftw_complex* out = nullptr;
  int n = 0;

  explicit RfftPlan(int size) : n(size) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    in = fftw_alloc_real(static_cast<std::size_t>(n));
    out = fftw_alloc_complex(static_cast<std::size_t>(n) / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }

  ~RfftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }

  RfftPlan(const RfftPlan&) = delete;
  RfftPlan& operator=(const RfftPlan&) = delete;
};

Eigen::VectorXd hamming(int n) {
  Eigen::VectorXd w(n);
  const double pi = 3.14159265358979323846;
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * pi * i / (n - 1));
  return w;
}

}  // namespace

namespace detail {

void unwrap_inplace(Eigen::Ref<Eigen::VectorXd> phase) {
  const double two_pi = 6.283185307179586476925286766559;
  if (phase.size() < 2) return;
  double prev_raw = phase[0];
  for (Eigen::Index i = 1; i < phase.size(); ++i) {
    double raw = phase[i];
    phase[i] = phase[i - 1] + std::remainder(raw - prev_raw, two_pi);
    prev_raw = raw;
  }
}

Eigen::VectorXcd rfft(const Eigen::VectorXd& series) {
  const int n = static_cast<int>(series.size());
  RfftPlan plan(n);
  for (int i = 0; i < n; ++i) plan.in[i] = series[i];
  fftw_execute(plan.plan);
  Eigen::VectorXcd out(n / 2 + 1);
  for (int k = 0; k < n / 2 + 1; ++k)
    out[k] = std::complex<double>(plan.out[k][0], plan.out[k][1]);
  return out;
}

}  // namespace detail

Spectrogram stft(const Eigen::VectorXd& series, const StftConfig& cfg) {
  if (cfg.window_len < 2)
    raise(ErrorCode::config_error, "STFT window must be at least 2 samples");
  if (cfg.overlap < 0 || cfg.overlap >= cfg.window_len)
    raise(ErrorCode::config_error,
          "STFT overlap must be in [0, window_len)");
  if (!(cfg.sample_rate_hz > 0.0))
    raise(ErrorCode::config_error, "STFT sample rate must be positive");
  if (series.size() < cfg.window_len)
    raise(ErrorCode::insufficient_data,
          "series of " + std::to_string(series.size()) +
              " samples is shorter than the STFT window (" +
              std::to_string(cfg.window_len) + ")");

  const int n = cfg.window_len;
  const int hop = cfg.window_len - cfg.overlap;
  const int n_bins = n / 2 + 1;
  const auto n_windows =
      static_cast<Eigen::Index>((series.size() - n) / hop + 1);

  Spectrogram spec;
  spec.sample_rate_hz = cfg.sample_rate_hz;
  spec.window_len = n;
  spec.hop = hop;
  spec.freq_bins_hz.resize(n_bins);
  for (int k = 0; k < n_bins; ++k)
    spec.freq_bins_hz[k] = cfg.sample_rate_hz * k / n;
  spec.time_bins_s.resize(n_windows);
  spec.power.resize(n_windows, n_bins);

  const Eigen::VectorXd window = hamming(n);
  RfftPlan plan(n);
  for (Eigen::Index w = 0; w < n_windows; ++w) {
    const Eigen::Index start = w * hop;
    spec.time_bins_s[w] =
        (static_cast<double>(start) + (n - 1) / 2.0) / cfg.sample_rate_hz;
    for (int i = 0; i < n; ++i)
      plan.in[i] = series[start + i] * window[i];
    fftw_execute(plan.plan);
    for (int k = 0; k < n_bins; ++k)
      spec.power(w, k) =
          plan.out[k][0] * plan.out[k][0] + plan.out[k][1] * plan.out[k][1];
  }
  return spec;
}

Eigen::VectorXd time_averaged_spectrum(const Spectrogram& spec,
                                       const std::vector<bool>& mask) {
  if (!mask.empty() &&
      mask.size() != static_cast<std::size_t>(spec.power.rows()))
    raise(ErrorCode::dimension_mismatch,
          "window mask length does not match the spectrogram");
  if (mask.empty()) {
    if (spec.power.rows() == 0)
      raise(ErrorCode::insufficient_data, "spectrogram holds no windows");
    return spec.power.colwise().mean();
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(spec.power.cols());
  Eigen::Index count = 0;
  for (Eigen::Index w = 0; w < spec.power.rows(); ++w) {
    if (!mask[static_cast<std::size_t>(w)]) continue;
    sum += spec.power.row(w).transpose();
    ++count;
  }
  if (count == 0)
    raise(ErrorCode::insufficient_data,
          "window mask excludes every spectrogram window");
  return sum / static_cast<double>(count);
}

void write_spectrogram_csv(const Spectrogram& spec, std::ostream& out) {
  out << "time_s";
  for (Eigen::Index k = 0; k < spec.freq_bins_hz.size(); ++k)
    out << ',' << spec.freq_bins_hz[k];
  out << '\n';
  for (Eigen::Index w = 0; w < spec.power.rows(); ++w) {
    out << spec.time_bins_s[w];
    for (Eigen::Index k = 0; k < spec.power.cols(); ++k)
      out << ',' << spec.power(w, k);
    out << '\n';
  }
}

void write_spectrogram_csv(const Spectrogram& spec, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  write_spectrogram_csv(spec, out);
  out.flush();
  if (!out) raise(ErrorCode::io_error, "spectrogram write to '" + path + "' failed");
}

}  // namespace levelsense
