#include "levelsense/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levelsense/errors.hpp"

namespace levelsense {

namespace {

void require_valid(const CsiTrace& trace, const char* label) {
  std::vector<TraceViolation> violations = validate_trace(trace);
  if (!violations.empty())
    raise(ErrorCode::malformed_input,
          std::string(label) + " rejected: " + violations.front().detail);
}

// Drops STFT windows whose samples overlap the first or last trim_samples of
// the sliced series. Returns an empty mask (meaning all windows) when the
// trim would reject everything.
std::vector<bool> edge_mask(const Spectrogram& spec, std::ptrdiff_t n_samples,
                            std::ptrdiff_t trim_samples,
                            std::vector<std::string>& warnings,
                            const char* label) {
  auto n_windows = static_cast<std::size_t>(spec.power.rows());
  if (trim_samples <= 0) return {};
  std::vector<bool> keep(n_windows, false);
  std::size_t kept = 0;
  for (std::size_t w = 0; w < n_windows; ++w) {
    auto start = static_cast<std::ptrdiff_t>(w) * spec.hop;
    std::ptrdiff_t end = start + spec.window_len;
    if (start >= trim_samples && end <= n_samples - trim_samples) {
      keep[w] = true;
      ++kept;
    }
  }
  if (kept == 0) {
    warnings.push_back(std::string("edge trim would drop every ") + label +
                       " window; trim skipped");
    return {};
  }
  return keep;
}

}  // namespace

SessionComponent session_component(const CsiTrace& trace,
                                   const PipelineConfig& cfg) {
  require_valid(trace, "trace");
  validate_chirp(cfg.chirp);
  if (cfg.padding_s < 0.0)
    raise(ErrorCode::config_error, "padding must be non-negative");

  const double fs = trace.packet_rate_hz;
  const auto n_frames = static_cast<std::ptrdiff_t>(trace.frames.size());
  const auto padding = static_cast<std::ptrdiff_t>(
      std::llround(cfg.padding_s * fs));
  const auto mid = static_cast<std::ptrdiff_t>(
      std::llround((cfg.padding_s + cfg.chirp.duration_s) * fs));
  const auto expected = static_cast<std::ptrdiff_t>(
      std::llround((cfg.padding_s + 2.0 * cfg.chirp.duration_s) * fs));
  if (n_frames + 1 < expected)
    raise(ErrorCode::insufficient_data,
          "trace has " + std::to_string(n_frames) +
              " frames, a padded bidirectional session needs about " +
              std::to_string(expected));

  SessionComponent sc;
  sc.up_begin = padding;
  sc.up_end = mid;
  sc.down_begin = mid;
  sc.down_end = std::min(expected, n_frames);

  int l, s;
  if (cfg.fixed_pair) {
    l = cfg.fixed_pair->first;
    s = cfg.fixed_pair->second;
  } else {
    double band_hi = std::max(cfg.chirp.f_start_hz, cfg.chirp.f_end_hz);
    std::tie(l, s) = select_pair(trace, cfg.highpass_cutoff_hz, band_hi);
  }
  sc.antenna_l = l;
  sc.antenna_s = s;

  // Phase extraction must precede the high-pass: filtering the complex
  // product first strips its static component, and the residual's phase
  // flips sign at every zero crossing instead of tracking the vibration.
  CombinedSeries combined = conjugate_multiply(trace, l, s);
  Eigen::MatrixXd phase = phase_series(combined);
  for (Eigen::Index c = 0; c < phase.cols(); ++c) {
    Eigen::VectorXd column = phase.col(c);
    phase.col(c) = highpass(column, cfg.highpass_cutoff_hz, fs);
  }
  PcaProjection pca = pca_first(phase);
  sc.component = std::move(pca.component);
  sc.pca_weights = std::move(pca.weights);
  sc.explained_variance_ratio = pca.explained_variance_ratio;
  return sc;
}

PipelineResult run_pipeline(const CsiTrace& trace, const PipelineConfig& cfg,
                            const CsiTrace* baseline) {
  SessionComponent sc = session_component(trace, cfg);
  const double fs = trace.packet_rate_hz;

  StftConfig stft_cfg = cfg.stft;
  stft_cfg.sample_rate_hz = fs;

  PipelineResult result;
  result.antenna_l = sc.antenna_l;
  result.antenna_s = sc.antenna_s;
  result.explained_variance_ratio = sc.explained_variance_ratio;

  const std::ptrdiff_t n_up = sc.up_end - sc.up_begin;
  const std::ptrdiff_t n_down = sc.down_end - sc.down_begin;
  Eigen::VectorXd up = sc.component.segment(sc.up_begin, n_up);
  Eigen::VectorXd down = sc.component.segment(sc.down_begin, n_down);
  result.spec_up = stft(up, stft_cfg);
  result.spec_down = stft(down, stft_cfg);

  const auto trim =
      static_cast<std::ptrdiff_t>(std::llround(cfg.edge_trim_s * fs));
  std::vector<bool> mask_up =
      edge_mask(result.spec_up, n_up, trim, result.warnings, "up-sweep");
  std::vector<bool> mask_down =
      edge_mask(result.spec_down, n_down, trim, result.warnings, "down-sweep");

  // Background estimate: an explicit no-excitation capture when given,
  // otherwise the leading padding of the session itself.
  Eigen::VectorXd quiet;
  if (baseline != nullptr) {
    require_valid(*baseline, "baseline");
    if (baseline->packet_rate_hz != trace.packet_rate_hz)
      raise(ErrorCode::mode_mismatch,
            "baseline packet rate differs from the trace");
    if (baseline->n_subcarriers != trace.n_subcarriers)
      raise(ErrorCode::mode_mismatch,
            "baseline subcarrier count differs from the trace");
    int needed = std::max(sc.antenna_l, sc.antenna_s);
    if (baseline->n_rx <= needed)
      raise(ErrorCode::mode_mismatch,
            "baseline lacks antenna " + std::to_string(needed));
    CombinedSeries combined =
        conjugate_multiply(*baseline, sc.antenna_l, sc.antenna_s);
    Eigen::MatrixXd phase = phase_series(combined);
    for (Eigen::Index c = 0; c < phase.cols(); ++c) {
      Eigen::VectorXd column = phase.col(c);
      phase.col(c) = highpass(column, cfg.highpass_cutoff_hz, fs);
    }
    Eigen::VectorXd projected = phase * sc.pca_weights;
    auto n_b = static_cast<std::ptrdiff_t>(projected.size());
    if (n_b - 2 * trim >= stft_cfg.window_len)
      quiet = projected.segment(trim, n_b - 2 * trim);
    else if (n_b >= stft_cfg.window_len)
      quiet = std::move(projected);
    else
      result.warnings.push_back(
          "baseline shorter than one analysis window; subtraction skipped");
  } else if (sc.up_begin - 2 * trim >= stft_cfg.window_len) {
    quiet = sc.component.segment(trim, sc.up_begin - 2 * trim);
  } else {
    result.warnings.push_back(
        "no baseline and padding shorter than one analysis window; "
        "subtraction skipped");
  }
  if (quiet.size() > 0) {
    Spectrogram quiet_spec = stft(quiet, stft_cfg);
    result.spec_up = spectral_subtract(result.spec_up, quiet_spec);
    result.spec_down = spectral_subtract(result.spec_down, quiet_spec);
  }

  ResonanceConfig rcfg;
  rcfg.peaks = cfg.peaks;
  rcfg.crosscheck_bins = cfg.crosscheck_bins;
  result.estimate =
      estimate_resonance(result.spec_up, result.spec_down, cfg.chirp,
                         reversed(cfg.chirp), rcfg, mask_up, mask_down);
  return result;
}

}  // namespace levelsense
