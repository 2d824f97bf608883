#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "legscreen/manifest.hpp"
#include "legscreen/pipeline.hpp"
#include "legscreen/screening_metrics.hpp"

namespace legscreen {

/// One row of the evaluation report. Measured fields are empty for trials
/// without sensor streams; symmetry is empty until both legs of the same
/// subject, week and load are present.
struct ReportRow {
  std::string trial_id;
  Leg leg = Leg::right;
  double load_fraction = 0.5;
  int reps_est = 0;
  std::optional<int> reps_meas;
  std::optional<double> sym_est;
  std::optional<double> sym_meas;
  std::optional<double> disp_rmse_m;
  std::optional<double> disp_nrmse_pct;
  std::optional<double> force_rmse_n;
  std::optional<double> force_nrmse_pct;
  double peak_force_n = 0.0;
  std::optional<double> peak_force_meas_n;
};

struct TrialFailure {
  std::string trial_id;
  std::string reason;
};

struct Evaluation {
  /// Ordered by trial_id.
  std::vector<ReportRow> rows;
  std::vector<ManifestSkip> skipped;
  std::vector<TrialFailure> failed;
};

/// Camera pipeline plus sensor comparison for one trial (symmetry left empty).
ReportRow evaluate_trial(const TrialRecord& trial, const StereoCalibration& calib, const LegPressParams& params,
                         const PipelineConfig& cfg = {});

/// Every manifest trial, `threads` at a time (0: hardware concurrency).
/// Trials whose files fail to parse or whose pipeline throws are excluded and
/// listed in `failed`.
Evaluation evaluate_manifest(const Manifest& manifest, const PipelineConfig& cfg = {}, unsigned threads = 0);

/// Fills sym_est / sym_meas for rows whose opposite leg is present.
void pair_symmetry(std::vector<ReportRow>& rows, const Manifest& manifest);

std::string format_report(const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report(const std::filesystem::path& path);

/// Cohort accuracies in the layout of the study's summary table.
/// Distance/force: 100 - mean NRMSE. Reps/symmetry: mean per-trial
/// agreement, excluding trials whose measured value is 0.
struct SummaryTable {
  std::size_t trials = 0;
  double distance_accuracy_pct = 0.0;
  double force_accuracy_pct = 0.0;
  double reps_accuracy_pct = 0.0;
  double symmetry_accuracy_pct = 0.0;
  double disp_rmse_mean_m = 0.0;
  double disp_rmse_std_m = 0.0;
  double disp_nrmse_mean_pct = 0.0;
  double disp_nrmse_std_pct = 0.0;
  double force_rmse_mean_n = 0.0;
  double force_rmse_std_n = 0.0;
  double force_nrmse_mean_pct = 0.0;
  double force_nrmse_std_pct = 0.0;
  std::size_t reps_excluded = 0;
  std::size_t symmetry_excluded = 0;
};

SummaryTable summarize(const std::vector<ReportRow>& rows);
std::string format_summary(const SummaryTable& table);

/// Trials of one leg at one load, tracked across weeks.
struct ProgressSelection {
  Leg leg = Leg::right;
  double load_fraction = 0.5;
};

struct ProgressSeries {
  std::string subject_id;
  std::vector<int> weeks;
  /// Per-subject max-normalized; measured columns empty when unavailable.
  std::vector<double> norm_reps_est;
  std::vector<std::optional<double>> norm_reps_meas;
  std::vector<double> norm_peak_force_est;
  std::vector<std::optional<double>> norm_peak_force_meas;
  ProgressTrend reps_trend;
  ProgressTrend peak_force_trend;
  /// Only when every week has a measured value.
  std::optional<ProgressTrend> reps_meas_trend;
  std::optional<ProgressTrend> peak_force_meas_trend;
};

/// One series per subject, ordered by subject id. Several trials in the same
/// week are averaged.
std::vector<ProgressSeries> subject_progress(const std::vector<ReportRow>& rows, const Manifest& manifest,
                                             ProgressSelection selection = {});

/// Week-wise mean of the normalized subject series and its trend lines.
ProgressSeries cohort_progress(const std::vector<ProgressSeries>& subjects);

/// `week,norm_reps_est,norm_reps_meas,norm_peak_force_est,norm_peak_force_meas`
/// followed by `#` footer lines with slope, r^2 and percent increase.
std::string format_progress(const ProgressSeries& series);

}  // namespace legscreen
