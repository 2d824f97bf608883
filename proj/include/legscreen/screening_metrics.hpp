#pragma once

#include <optional>
#include <span>
#include <vector>

#include "legscreen/series.hpp"

namespace legscreen {

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;
};

/// Full span of `t` with `trim_s` removed at each edge.
TimeWindow trimmed_window(std::span<const double> t, double trim_s = 1.0);

enum class CrossingRule {
  /// Every strict downward sign change of the mean-centred signal.
  zero_crossing,
  /// Downward sign change counted only after the signal has risen at least
  /// `hysteresis_fraction` of its range above zero since the last counted one.
  hysteresis,
};

struct RepCountConfig {
  CrossingRule rule = CrossingRule::hysteresis;
  double hysteresis_fraction = 0.1;
};

struct RepCount {
  int count = 0;
  std::vector<double> crossing_times;
};

RepCount count_reps(const DisplacementSeries& series, TimeWindow window,
                    const RepCountConfig& cfg = {});

struct SymmetryResult {
  int reps_right = 0;
  int reps_left = 0;
  double percent = 0.0;
};

/// 100 * min / max. Throws undefined_symmetry when both counts are zero.
SymmetryResult percent_symmetry(int reps_right, int reps_left);

struct AccuracyReport {
  double rmse = 0.0;
  double nrmse_percent = 0.0;
  double range_of_truth = 0.0;
};

/// RMSE of `estimated` against `measured`, normalized by the range of the
/// measured samples. Both must already share one time grid.
AccuracyReport accuracy(std::span<const double> estimated, std::span<const double> measured);

struct ProgressTrend {
  std::vector<int> sessions;
  std::vector<double> normalized_values;
  double slope = 0.0;      ///< per week
  double intercept = 0.0;  ///< fitted value at week 0
  double r_squared = 0.0;
  /// Fitted change from first to last session relative to the fitted first
  /// session value, in percent.
  double percent_increase = 0.0;
  /// All normalized values equal; slope and r^2 are reported as 0.
  bool degenerate = false;
};

/// Normalize by the per-subject maximum and fit an ordinary least-squares line
/// over (session, normalized value).
ProgressTrend progress_trend(std::span<const int> sessions, std::span<const double> values);

/// Sessions numbered 1..n.
ProgressTrend progress_trend(std::span<const double> values);

/// Ordinary least-squares line of already-normalized values, without
/// rescaling. Used to fit cohort averages of per-subject normalized values.
ProgressTrend fit_trend(std::span<const int> sessions, std::span<const double> normalized);

double peak_force(const ForceSeries& series);
double peak_force(const ForceSeries& series, TimeWindow window);

struct Alignment {
  double lag_s = 0.0;
  double correlation = 0.0;
};

/// Lag L maximizing the correlation between `estimate(t)` and
/// `measured(t + L)` for |L| <= max_lag_s. `estimate` must be uniformly
/// sampled; the search steps on its grid and refines the peak with a parabola.
Alignment estimate_lag(const DisplacementSeries& estimate, const DisplacementSeries& measured,
                       double max_lag_s = 2.0);

/// `values(t + lag)` at each grid time, linearly interpolated.
std::vector<double> sample_shifted(std::span<const double> t, std::span<const double> values,
                                   std::span<const double> grid, double lag_s);

/// Per-trial agreement used for count-style metrics:
/// 100 * (1 - |estimated - measured| / measured). nullopt when measured is 0.
std::optional<double> relative_agreement(double estimated, double measured);

}  // namespace legscreen
