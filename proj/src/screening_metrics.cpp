#include "legscreen/screening_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "legscreen/errors.hpp"

namespace legscreen {

TimeWindow trimmed_window(std::span<const double> t, double trim_s) {
  if (t.empty()) fail(ErrorKind::insufficient_data, "cannot window an empty series");
  TimeWindow w{t.front() + trim_s, t.back() - trim_s};
  if (!(w.end > w.start))
    fail(ErrorKind::insufficient_data, "series is too short for the requested edge trim");
  return w;
}

RepCount count_reps(const DisplacementSeries& series, TimeWindow window, const RepCountConfig& cfg) {
  std::vector<double> t;
  std::vector<double> s;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.timestamps[i] >= window.start && series.timestamps[i] <= window.end) {
      t.push_back(series.timestamps[i]);
      s.push_back(series.displacement[i]);
    }
  }
  if (s.size() < 2) fail(ErrorKind::insufficient_data, "rep-count window holds fewer than 2 samples");

  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  for (double& v : s) v -= mean;
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  const double threshold = cfg.hysteresis_fraction * (*hi - *lo);

  RepCount out;
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    peak = std::max(peak, s[i]);
    if (!(s[i] > 0.0 && s[i + 1] <= 0.0)) continue;
    if (cfg.rule == CrossingRule::hysteresis && !(peak >= threshold)) continue;
    const double frac = s[i] / (s[i] - s[i + 1]);
    out.crossing_times.push_back(t[i] + frac * (t[i + 1] - t[i]));
    peak = -std::numeric_limits<double>::infinity();
  }
  out.count = static_cast<int>(out.crossing_times.size());
  return out;
}

SymmetryResult percent_symmetry(int reps_right, int reps_left) {
  if (reps_right < 0 || reps_left < 0)
    fail(ErrorKind::invalid_argument, "repetition counts must be non-negative");
  const int hi = std::max(reps_right, reps_left);
  if (hi == 0) fail(ErrorKind::undefined_symmetry, "symmetry is undefined when both legs have 0 reps");
  const int lo = std::min(reps_right, reps_left);
  return {reps_right, reps_left, 100.0 * static_cast<double>(lo) / static_cast<double>(hi)};
}

AccuracyReport accuracy(std::span<const double> estimated, std::span<const double> measured) {
  if (estimated.size() != measured.size())
    fail(ErrorKind::invalid_argument, "accuracy: series lengths differ; resample onto a common grid");
  if (measured.empty()) fail(ErrorKind::insufficient_data, "accuracy: empty series");
  double sq = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double d = estimated[i] - measured[i];
    sq += d * d;
  }
  const auto [lo, hi] = std::minmax_element(measured.begin(), measured.end());
  AccuracyReport out;
  out.range_of_truth = *hi - *lo;
  if (!(out.range_of_truth > 0.0))
    fail(ErrorKind::zero_range, "accuracy: measured series is constant, NRMSE undefined");
  out.rmse = std::sqrt(sq / static_cast<double>(measured.size()));
  out.nrmse_percent = 100.0 * out.rmse / out.range_of_truth;
  return out;
}

ProgressTrend fit_trend(std::span<const int> sessions, std::span<const double> normalized) {
  const std::size_t n = sessions.size();
  if (n != normalized.size()) fail(ErrorKind::invalid_argument, "trend: sessions/values lengths differ");
  if (n < 2) fail(ErrorKind::insufficient_data, "trend needs at least 2 sessions");
  for (double v : normalized)
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "trend: non-finite value");

  ProgressTrend out;
  out.sessions.assign(sessions.begin(), sessions.end());
  out.normalized_values.assign(normalized.begin(), normalized.end());

  double xm = 0.0;
  double ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += sessions[i];
    ym += normalized[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = sessions[i] - xm;
    const double dy = normalized[i] - ym;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) fail(ErrorKind::insufficient_data, "trend needs at least 2 distinct sessions");

  const auto [lo, hi] = std::minmax_element(normalized.begin(), normalized.end());
  if (*hi - *lo <= 1e-15 * std::max(1.0, std::abs(*hi))) {
    out.degenerate = true;
    out.intercept = ym;
    return out;
  }

  out.slope = sxy / sxx;
  out.intercept = ym - out.slope * xm;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = normalized[i] - (out.intercept + out.slope * sessions[i]);
    ss_res += r * r;
  }
  out.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);

  const auto [first, last] = std::minmax_element(sessions.begin(), sessions.end());
  const double start = out.intercept + out.slope * *first;
  if (start != 0.0) out.percent_increase = 100.0 * out.slope * (*last - *first) / start;
  return out;
}

ProgressTrend progress_trend(std::span<const int> sessions, std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::insufficient_data, "trend needs at least 2 sessions");
  for (double v : values)
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "trend: non-finite value");
  const double peak = *std::max_element(values.begin(), values.end());
  if (!(peak > 0.0)) fail(ErrorKind::invalid_argument, "trend: per-subject maximum must be positive");
  std::vector<double> normalized(values.begin(), values.end());
  for (double& v : normalized) v /= peak;
  return fit_trend(sessions, normalized);
}

ProgressTrend progress_trend(std::span<const double> values) {
  std::vector<int> sessions(values.size());
  std::iota(sessions.begin(), sessions.end(), 1);
  return progress_trend(sessions, values);
}

double peak_force(const ForceSeries& series) {
  if (series.force.empty()) fail(ErrorKind::insufficient_data, "peak force of an empty series");
  return *std::max_element(series.force.begin(), series.force.end());
}

double peak_force(const ForceSeries& series, TimeWindow window) {
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.timestamps[i] < window.start || series.timestamps[i] > window.end) continue;
    best = std::max(best, series.force[i]);
    any = true;
  }
  if (!any) fail(ErrorKind::insufficient_data, "no force samples inside the window");
  return best;
}

std::vector<double> sample_shifted(std::span<const double> t, std::span<const double> values,
                                   std::span<const double> grid, double lag_s) {
  std::vector<double> query(grid.begin(), grid.end());
  for (double& q : query) q += lag_s;
  return interpolate_linear(t, values, query);
}

namespace {

// Pearson correlation of est against measured(t + lag), restricted to grid
// points whose shifted time falls inside the measured span.
std::optional<double> shifted_correlation(const DisplacementSeries& est, const DisplacementSeries& meas,
                                          double lag) {
  const double lo = meas.timestamps.front();
  const double hi = meas.timestamps.back();
  std::vector<double> grid;
  std::vector<double> a;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double q = est.timestamps[i] + lag;
    if (q < lo || q > hi) continue;
    grid.push_back(q);
    a.push_back(est.displacement[i]);
  }
  if (a.size() < 3) return std::nullopt;
  const std::vector<double> b = interpolate_linear(meas.timestamps, meas.displacement, grid);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

Alignment estimate_lag(const DisplacementSeries& estimate, const DisplacementSeries& measured,
                       double max_lag_s) {
  const double h = uniform_step(estimate.timestamps);
  if (measured.size() < 2) fail(ErrorKind::insufficient_data, "alignment: measured series too short");
  const auto max_k = static_cast<long>(std::floor(max_lag_s / h + 1e-9));

  auto corr_at = [&](long k) { return shifted_correlation(estimate, measured, static_cast<double>(k) * h); };

  // Coarse pass keeps high-rate grids cheap; the fine pass searches around it.
  const long stride = std::max<long>(1, max_k / 64);
  long best_k = 0;
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](long k) {
    if (k < -max_k || k > max_k) return;
    const auto c = corr_at(k);
    if (c && *c > best) {
      best = *c;
      best_k = k;
    }
  };
  for (long k = -(max_k / stride) * stride; k <= max_k; k += stride) consider(k);
  if (stride > 1) {
    const long centre = best_k;
    for (long k = centre - stride + 1; k < centre + stride; ++k) consider(k);
  }
  if (!std::isfinite(best)) fail(ErrorKind::insufficient_data, "alignment: no overlapping lag found");

  double offset = 0.0;
  if (best_k > -max_k && best_k < max_k) {
    const auto cm = corr_at(best_k - 1);
    const auto cp = corr_at(best_k + 1);
    if (cm && cp) {
      const double denom = *cm - 2.0 * best + *cp;
      if (denom < 0.0) offset = std::clamp(0.5 * (*cm - *cp) / denom, -0.5, 0.5);
    }
  }
  return {(static_cast<double>(best_k) + offset) * h, best};
}

std::optional<double> relative_agreement(double estimated, double measured) {
  if (measured == 0.0) return std::nullopt;
  return 100.0 * (1.0 - std::abs(estimated - measured) / std::abs(measured));
}

}  // namespace legscreen
