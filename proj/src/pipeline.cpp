#include "legscreen/pipeline.hpp"

#include "legscreen/errors.hpp"

namespace legscreen {

Trajectory3D triangulate_stage(const KeypointTrack& track, const StereoCalibration& calib,
                               const PipelineConfig& cfg) {
  return track_to_trajectory(track, calib, cfg.min_confidence);
}

DisplacementSeries displacement_stage(const Trajectory3D& traj, const PipelineConfig& cfg,
                                      DepthNoiseRemoval* diagnostics) {
  DepthNoiseRemoval removal = remove_depth_noise(traj, cfg.noise_axis);
  DisplacementSeries out = displacement_from_start(removal.projected, cfg.start);
  if (diagnostics) *diagnostics = std::move(removal);
  return out;
}

DisplacementSeries smoothed_displacement(const DisplacementSeries& raw, const PipelineConfig& cfg) {
  return smooth(resample_uniform(raw), cfg.smoothing);
}

ForceSeries force_stage(const DisplacementSeries& raw, const LegPressParams& params, const PipelineConfig& cfg) {
  return estimate_force(resample_uniform(raw), params, cfg.smoothing);
}

RepCount reps_stage(const DisplacementSeries& raw, const PipelineConfig& cfg) {
  const DisplacementSeries s = smoothed_displacement(raw, cfg);
  return count_reps(s, trimmed_window(s.timestamps, cfg.edge_trim_s), cfg.reps);
}

CameraEstimate estimate_trial(const KeypointTrack& track, const StereoCalibration& calib,
                              const LegPressParams& params, const PipelineConfig& cfg) {
  CameraEstimate est;
  est.trajectory = triangulate_stage(track, calib, cfg);
  est.raw_displacement = displacement_stage(est.trajectory, cfg, &est.projection);
  const DisplacementSeries uniform = resample_uniform(est.raw_displacement);
  est.displacement = smooth(uniform, cfg.smoothing);
  est.force = estimate_force(uniform, params, cfg.smoothing);
  est.window = trimmed_window(est.displacement.timestamps, cfg.edge_trim_s);
  est.reps = count_reps(est.displacement, est.window, cfg.reps);
  est.peak_force = peak_force(est.force, est.window);
  return est;
}

std::vector<std::size_t> window_indices(std::span<const double> t, TimeWindow w) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= w.start && t[i] <= w.end) idx.push_back(i);
  return idx;
}

SensorComparison compare_with_sensors(const CameraEstimate& est, const DisplacementSeries& encoder,
                                      const ForceSeries& plate, const PipelineConfig& cfg) {
  if (encoder.size() < 2 || plate.size() < 2)
    fail(ErrorKind::insufficient_data, "ground-truth streams need at least 2 samples");
  SensorComparison out;
  if (cfg.align) out.alignment = estimate_lag(est.displacement, encoder, cfg.max_lag_s);

  const auto& grid = est.displacement.timestamps;
  const double lag = out.alignment.lag_s;
  out.measured_displacement = sample_shifted(encoder.timestamps, encoder.displacement, grid, lag);
  out.measured_force = sample_shifted(plate.timestamps, plate.force, grid, lag);

  // Score only where both measured streams really cover the shifted time.
  std::vector<double> est_x, meas_x, est_f, meas_f;
  for (std::size_t i : window_indices(grid, est.window)) {
    const double q = grid[i] + lag;
    if (q < encoder.timestamps.front() || q > encoder.timestamps.back()) continue;
    if (q < plate.timestamps.front() || q > plate.timestamps.back()) continue;
    est_x.push_back(est.displacement.displacement[i]);
    meas_x.push_back(out.measured_displacement[i]);
    est_f.push_back(est.force.force[i]);
    meas_f.push_back(out.measured_force[i]);
  }
  if (est_x.size() < 2) fail(ErrorKind::insufficient_data, "ground truth does not overlap the estimate window");
  out.displacement = accuracy(est_x, meas_x);
  out.force = accuracy(est_f, meas_f);

  DisplacementSeries shifted_encoder = encoder;
  for (double& t : shifted_encoder.timestamps) t -= lag;
  out.reps_measured = count_reps(shifted_encoder, est.window, cfg.reps).count;

  ForceSeries shifted_plate = plate;
  for (double& t : shifted_plate.timestamps) t -= lag;
  out.peak_force_measured = peak_force(shifted_plate, est.window);
  return out;
}

}  // namespace legscreen
