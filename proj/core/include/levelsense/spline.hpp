#pragma once

#include <optional>
#include <vector>

namespace levelsense {

// Cubic spline through (frequency, level) knots, one polynomial per segment:
// S(x) = a + b*(x-x0) + c*(x-x0)^2 + d*(x-x0)^3 on [x0, x1). Natural ends
// (zero second derivative) by default; clamped ends pin the first derivative
// instead, defaulting to one-sided finite differences of the outer knots.
enum class SplineEnds { natural, clamped };

struct SplineModel {
  std::vector<double> knots_hz;    // strictly increasing
  std::vector<double> levels_ml;   // knot values
  std::vector<double> a, b, c, d;  // per-segment coefficients
  double capacity_ml = 0.0;
  SplineEnds ends = SplineEnds::natural;
};

struct SplineFitOptions {
  SplineEnds ends = SplineEnds::natural;
  std::optional<double> clamp_slope_left;   // level per Hz at the lowest knot
  std::optional<double> clamp_slope_right;
};

// Duplicate frequencies with conflicting levels are ill-posed
// (ErrorCode::ill_posed); exact duplicates merge. Fewer than three distinct
// frequencies is insufficient (ErrorCode::insufficient_data).
SplineModel fit_spline(const std::vector<double>& freqs_hz,
                       const std::vector<double>& levels_ml,
                       double capacity_ml,
                       const SplineFitOptions& opts = {});

struct LevelPrediction {
  double level_ml = 0.0;
  bool out_of_range = false;  // query clamped to the nearest knot
};

// Evaluates the spline; queries outside the knot range return the nearest
// knot's level flagged out_of_range. Output is clamped to [0, capacity].
LevelPrediction predict_continuous(const SplineModel& model, double freq_hz);

// Means of levels' measurements: collapses repeated measurements of the same
// level to (mean frequency, level) pairs, ready for fitting.
void average_per_level(const std::vector<double>& freqs_hz,
                       const std::vector<double>& levels_ml,
                       std::vector<double>& out_freqs,
                       std::vector<double>& out_levels);

}  // namespace levelsense
