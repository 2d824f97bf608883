#pragma once

#include "legscreen/legpress_dynamics.hpp"
#include "legscreen/screening_metrics.hpp"
#include "legscreen/series.hpp"
#include "legscreen/stereo_geometry.hpp"
#include "legscreen/trajectory_analysis.hpp"

namespace legscreen {

struct PipelineConfig {
  double min_confidence = kMinConfidence;
  NoiseAxis noise_axis = NoiseAxis::viewing_ray;
  StartPolicy start = StartPolicy::mean_first_n(3);
  SmoothingConfig smoothing;
  RepCountConfig reps;
  /// Seconds dropped at each edge of the trial for counting and scoring.
  double edge_trim_s = 1.0;
  bool align = true;
  double max_lag_s = 2.0;
};

// Stages. Each consumes exactly what the previous stage writes to disk, so the
// CLI can run them one file at a time.

Trajectory3D triangulate_stage(const KeypointTrack& track, const StereoCalibration& calib,
                               const PipelineConfig& cfg);

/// Depth-noise projection and start-referenced distance. Output keeps the
/// (possibly irregular) frame timestamps.
DisplacementSeries displacement_stage(const Trajectory3D& traj, const PipelineConfig& cfg,
                                      DepthNoiseRemoval* diagnostics = nullptr);

/// Uniform resampling followed by smoothing.
DisplacementSeries smoothed_displacement(const DisplacementSeries& raw, const PipelineConfig& cfg);

ForceSeries force_stage(const DisplacementSeries& raw, const LegPressParams& params, const PipelineConfig& cfg);

RepCount reps_stage(const DisplacementSeries& raw, const PipelineConfig& cfg);

struct CameraEstimate {
  Trajectory3D trajectory;
  DepthNoiseRemoval projection;
  DisplacementSeries raw_displacement;
  /// Uniform grid, smoothed.
  DisplacementSeries displacement;
  ForceSeries force;
  TimeWindow window;
  RepCount reps;
  double peak_force = 0.0;
};

CameraEstimate estimate_trial(const KeypointTrack& track, const StereoCalibration& calib,
                              const LegPressParams& params, const PipelineConfig& cfg = {});

struct SensorComparison {
  Alignment alignment;
  /// Measured streams shifted by the lag and sampled on the camera grid.
  std::vector<double> measured_displacement;
  std::vector<double> measured_force;
  AccuracyReport displacement;
  AccuracyReport force;
  int reps_measured = 0;
  double peak_force_measured = 0.0;
};

/// Align encoder/force-plate streams to the estimate and score it over the
/// estimate's window.
SensorComparison compare_with_sensors(const CameraEstimate& est, const DisplacementSeries& encoder,
                                      const ForceSeries& plate, const PipelineConfig& cfg = {});

/// Indices of `t` inside `w`.
std::vector<std::size_t> window_indices(std::span<const double> t, TimeWindow w);

}  // namespace legscreen
