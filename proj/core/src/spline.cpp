#include "levelsense/spline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "levelsense/errors.hpp"

namespace levelsense {

namespace {

// Thomas algorithm; diagonals are (sub, diag, super), solution lands in rhs.
void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag,
                       std::vector<double>& super, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    double w = sub[i] / diag[i - 1];
    diag[i] -= w * super[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    rhs[i] = (rhs[i] - super[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

void average_per_level(const std::vector<double>& freqs_hz,
                       const std::vector<double>& levels_ml,
                       std::vector<double>& out_freqs,
                       std::vector<double>& out_levels) {
  if (freqs_hz.size() != levels_ml.size())
    raise(ErrorCode::dimension_mismatch,
          "frequency and level lists differ in length");
  std::map<double, std::pair<double, int>> groups;
  for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
    auto& [sum, count] = groups[levels_ml[i]];
    sum += freqs_hz[i];
    ++count;
  }
  out_freqs.clear();
  out_levels.clear();
  for (const auto& [level, acc] : groups) {
    out_levels.push_back(level);
    out_freqs.push_back(acc.first / acc.second);
  }
}

SplineModel fit_spline(const std::vector<double>& freqs_hz,
                       const std::vector<double>& levels_ml,
                       double capacity_ml, const SplineFitOptions& opts) {
  if (freqs_hz.size() != levels_ml.size())
    raise(ErrorCode::dimension_mismatch,
          "frequency and level lists differ in length");
  if (!(capacity_ml > 0.0))
    raise(ErrorCode::config_error, "capacity must be positive");

  std::vector<std::size_t> order(freqs_hz.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&freqs_hz](std::size_t a, std::size_t b) {
    return freqs_hz[a] < freqs_hz[b];
  });

  std::vector<double> x, y;
  for (std::size_t idx : order) {
    double f = freqs_hz[idx], l = levels_ml[idx];
    if (!x.empty() && x.back() == f) {
      if (y.back() != l)
        raise(ErrorCode::ill_posed,
              "frequency " + std::to_string(f) +
                  " Hz maps to two different levels");
      continue;  // exact duplicate measurement
    }
    x.push_back(f);
    y.push_back(l);
  }
  const std::size_t n = x.size();
  if (n < 3)
    raise(ErrorCode::insufficient_data,
          "spline fitting needs at least three distinct frequencies, got " +
              std::to_string(n));

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];

  // Second-derivative system: natural ends pin curvature, clamped ends pin
  // slope (defaulting to the outer knots' secants).
  std::vector<double> sub(n, 0.0), diag(n, 1.0), super(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    sub[i] = h[i - 1];
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    super[i] = h[i];
    rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
  }
  if (opts.ends == SplineEnds::clamped) {
    double s0 = opts.clamp_slope_left.value_or((y[1] - y[0]) / h[0]);
    double s1 = opts.clamp_slope_right.value_or((y[n - 1] - y[n - 2]) / h[n - 2]);
    diag[0] = 2.0 * h[0];
    super[0] = h[0];
    rhs[0] = 6.0 * ((y[1] - y[0]) / h[0] - s0);
    sub[n - 1] = h[n - 2];
    diag[n - 1] = 2.0 * h[n - 2];
    rhs[n - 1] = 6.0 * (s1 - (y[n - 1] - y[n - 2]) / h[n - 2]);
  }
  solve_tridiagonal(sub, diag, super, rhs);
  const std::vector<double>& m = rhs;

  SplineModel model;
  model.knots_hz = x;
  model.levels_ml = y;
  model.capacity_ml = capacity_ml;
  model.ends = opts.ends;
  model.a.resize(n - 1);
  model.b.resize(n - 1);
  model.c.resize(n - 1);
  model.d.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    model.a[i] = y[i];
    model.b[i] =
        (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
    model.c[i] = m[i] / 2.0;
    model.d[i] = (m[i + 1] - m[i]) / (6.0 * h[i]);
  }
  return model;
}

LevelPrediction predict_continuous(const SplineModel& model, double freq_hz) {
  if (model.knots_hz.size() < 2 ||
      model.a.size() != model.knots_hz.size() - 1)
    raise(ErrorCode::malformed_input, "spline model has no segments");

  const auto& x = model.knots_hz;
  auto clamp_level = [&model](double level) {
    return std::clamp(level, 0.0, model.capacity_ml);
  };
  if (freq_hz < x.front())
    return {clamp_level(model.levels_ml.front()), true};
  if (freq_hz > x.back())
    return {clamp_level(model.levels_ml.back()), true};
  if (freq_hz == x.back()) return {clamp_level(model.levels_ml.back()), false};

  auto it = std::upper_bound(x.begin(), x.end(), freq_hz);
  std::size_t seg = static_cast<std::size_t>(it - x.begin()) - 1;
  double dx = freq_hz - x[seg];
  double level = model.a[seg] +
                 dx * (model.b[seg] + dx * (model.c[seg] + dx * model.d[seg]));
  return {clamp_level(level), false};
}

}  // namespace levelsense
