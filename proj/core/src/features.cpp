#include "levelsense/features.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "detail.hpp"
#include "levelsense/errors.hpp"

namespace levelsense {

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

// Sub-bin peak refinement: vertex of the parabola through the peak bin and
// its neighbors, displacement clamped to half a bin.
double refine_peak(const Eigen::VectorXd& freqs, const Eigen::VectorXd& power,
                   int bin) {
  if (bin <= 0 || bin + 1 >= power.size()) return freqs[bin];
  double pm = power[bin - 1], p0 = power[bin], pp = power[bin + 1];
  double denom = pm - 2.0 * p0 + pp;
  if (denom == 0.0) return freqs[bin];
  double delta = 0.5 * (pm - pp) / denom;
  delta = std::clamp(delta, -0.5, 0.5);
  double spacing = freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0;
  return freqs[bin] + delta * spacing;
}

struct DirectionResult {
  Peak first;
  double quality = 0.0;
  bool crosscheck_failed = false;
};

DirectionResult analyze_direction(const Spectrogram& spec,
                                  const ResonanceConfig& cfg,
                                  const std::vector<bool>& mask,
                                  const char* label) {
  Eigen::VectorXd avg = time_averaged_spectrum(spec, mask);
  std::vector<Peak> peaks = detect_peaks(spec.freq_bins_hz, avg, cfg.peaks);
  if (peaks.empty())
    raise(ErrorCode::no_peak,
          std::string("no peak in the ") + label + " sweep spectrum");
  DirectionResult result;
  result.first = peaks.front();

  std::vector<double> band;
  for (Eigen::Index k = 0; k < spec.freq_bins_hz.size(); ++k)
    if (spec.freq_bins_hz[k] >= cfg.peaks.band_min_hz) band.push_back(avg[k]);
  double med = median_of(std::move(band));
  result.quality = med > 0.0 ? result.first.power / med : 0.0;

  // Cross-check: the strongest single time-frequency cell should sit near
  // the averaged-spectrum peak; a distant cell hints at a transient
  // dominating the average.
  double best_cell = -1.0;
  int best_bin = -1;
  for (Eigen::Index w = 0; w < spec.power.rows(); ++w) {
    if (!mask.empty() && !mask[static_cast<std::size_t>(w)]) continue;
    for (Eigen::Index k = 0; k < spec.power.cols(); ++k) {
      if (spec.freq_bins_hz[k] < cfg.peaks.band_min_hz) continue;
      if (spec.power(w, k) > best_cell) {
        best_cell = spec.power(w, k);
        best_bin = static_cast<int>(k);
      }
    }
  }
  if (best_bin >= 0 &&
      std::abs(best_bin - result.first.bin) > cfg.crosscheck_bins) {
    result.crosscheck_failed = true;
    result.quality *= 0.5;
  }
  return result;
}

}  // namespace

Eigen::MatrixXd phase_series(const CombinedSeries& series) {
  const Eigen::Index n = series.values.rows();
  const Eigen::Index s = series.values.cols();
  if (n < 2)
    raise(ErrorCode::insufficient_data,
          "phase extraction needs at least two frames");
  Eigen::MatrixXd out(n, s);
  Eigen::VectorXd col(n);
  for (Eigen::Index c = 0; c < s; ++c) {
    for (Eigen::Index t = 0; t < n; ++t)
      col[t] = std::arg(series.values(t, c));
    detail::unwrap_inplace(col);
    out.col(c) = col.array() - col.mean();
  }
  return out;
}

PcaProjection pca_first(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index s = data.cols();
  if (s < 1) raise(ErrorCode::insufficient_data, "no channels to combine");
  if (n < s + 1)
    raise(ErrorCode::insufficient_data,
          "need more time samples (" + std::to_string(n) +
              ") than channels (" + std::to_string(s) + ")");

  Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    raise(ErrorCode::degenerate_input, "eigendecomposition failed");
  Eigen::VectorXd evals = solver.eigenvalues().cwiseMax(0.0);
  double total = evals.sum();
  if (!(total > 0.0))
    raise(ErrorCode::degenerate_input,
          "input has no variance to decompose");

  PcaProjection proj;
  proj.weights = solver.eigenvectors().col(s - 1);  // ascending order
  Eigen::Index strongest;
  proj.weights.cwiseAbs().maxCoeff(&strongest);
  if (proj.weights[strongest] < 0.0) proj.weights = -proj.weights;
  proj.component = centered * proj.weights;
  proj.explained_variance_ratio = evals[s - 1] / total;
  return proj;
}

std::vector<Peak> detect_peaks(const Eigen::VectorXd& freqs_hz,
                               const Eigen::VectorXd& power,
                               const PeakConfig& cfg) {
  if (freqs_hz.size() != power.size())
    raise(ErrorCode::dimension_mismatch,
          "frequency grid and power vector differ in length");
  if (!(cfg.threshold_divisor >= 1.0))
    raise(ErrorCode::config_error, "threshold divisor must be >= 1");
  if (cfg.min_spacing_hz < 0.0)
    raise(ErrorCode::config_error, "peak spacing must be non-negative");
  if (cfg.min_power < 0.0)
    raise(ErrorCode::config_error, "peak power floor must be non-negative");

  // Local maxima inside the band; plateaus resolve to their first bin.
  double band_max = 0.0;
  bool any_in_band = false;
  for (Eigen::Index k = 0; k < power.size(); ++k) {
    if (freqs_hz[k] < cfg.band_min_hz) continue;
    band_max = any_in_band ? std::max(band_max, power[k]) : power[k];
    any_in_band = true;
  }
  if (!any_in_band)
    raise(ErrorCode::no_peak, "no spectrum bins above the band floor");
  const double threshold = band_max / cfg.threshold_divisor;

  std::vector<int> candidates;
  for (Eigen::Index k = 1; k + 1 < power.size(); ++k) {
    if (freqs_hz[k] < cfg.band_min_hz) continue;
    if (power[k] < threshold || power[k] <= cfg.min_power) continue;
    if (power[k] > power[k - 1] && power[k] >= power[k + 1])
      candidates.push_back(static_cast<int>(k));
  }
  if (candidates.empty())
    raise(ErrorCode::no_peak, "no local maximum clears the power threshold");

  // Strongest first; equal power resolves to the lower frequency, which a
  // stable sort on descending power preserves from the ascending scan.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&power](int a, int b) { return power[a] > power[b]; });
  std::vector<int> kept;
  for (int k : candidates) {
    bool shadowed = false;
    for (int j : kept) {
      if (std::abs(freqs_hz[k] - freqs_hz[j]) < cfg.min_spacing_hz) {
        shadowed = true;
        break;
      }
    }
    if (!shadowed) kept.push_back(k);
  }
  std::sort(kept.begin(), kept.end());

  std::vector<Peak> peaks;
  peaks.reserve(kept.size());
  for (int k : kept)
    peaks.push_back({refine_peak(freqs_hz, power, k), power[k], k});
  return peaks;
}

ResonanceEstimate estimate_resonance(const Spectrogram& spec_up,
                                     const Spectrogram& spec_down,
                                     const ChirpConfig& chirp_up,
                                     const ChirpConfig& chirp_down,
                                     const ResonanceConfig& cfg,
                                     const std::vector<bool>& mask_up,
                                     const std::vector<bool>& mask_down) {
  double rate_up = sweep_rate(chirp_up);
  double rate_down = sweep_rate(chirp_down);
  if (!(rate_up > 0.0) || !(rate_down < 0.0))
    raise(ErrorCode::mode_mismatch,
          "expected an ascending and a descending sweep");
  if (std::abs(rate_up + rate_down) > 1e-9 * std::abs(rate_up))
    raise(ErrorCode::mode_mismatch,
          "sweep rates are not mirrored: " + std::to_string(rate_up) +
              " vs " + std::to_string(rate_down));

  DirectionResult up = analyze_direction(spec_up, cfg, mask_up, "ascending");
  DirectionResult down =
      analyze_direction(spec_down, cfg, mask_down, "descending");

  ResonanceEstimate est;
  est.f_up_hz = up.first.freq_hz;
  est.f_down_hz = down.first.freq_hz;
  est.f_resonance_hz = 0.5 * (est.f_up_hz + est.f_down_hz);
  est.peak_power_up = up.first.power;
  est.peak_power_down = down.first.power;
  est.quality = std::min(up.quality, down.quality);
  return est;
}

}  // namespace levelsense
