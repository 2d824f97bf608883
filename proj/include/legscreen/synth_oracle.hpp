#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "legscreen/legpress_dynamics.hpp"
#include "legscreen/manifest.hpp"
#include "legscreen/pipeline.hpp"
#include "legscreen/screening_metrics.hpp"
#include "legscreen/series.hpp"
#include "legscreen/stereo_geometry.hpp"

namespace legscreen {

/// Hip path in the left-camera frame is `origin + x(t) * direction`.
struct RailPose {
  Vec3 origin{-0.25, 0.1, 4.0};
  Vec3 direction = Vec3(0.93, -0.33, 0.12).normalized();
};

enum class MotionKind { sinusoid, force_profile };

/// x(t) = A (1 - cos(2 pi f (t - t_on))) for `cycles` periods, at rest before
/// and after.
struct SinusoidMotion {
  double amplitude_m = 0.2;
  double frequency_hz = 0.5;
  int cycles = 14;
};

/// Applied foot-plate force, linearly interpolated between samples and held
/// at the end values outside them. The sled starts at rest at x = 0, t = 0.
struct ForceProfile {
  std::vector<double> timestamps;
  std::vector<double> force;
};

struct NoiseConfig {
  double pixel_std_px = 1.0;
  int counts_per_rev = 10000;
  double force_noise_std_n = 2.0;
  /// Camera frame times move by up to this fraction of the frame interval.
  double camera_jitter_fraction = 0.1;
  /// Probability that a view misses the joint in a frame.
  double dropout_probability = 0.0;
};

struct SensorRates {
  double camera_hz = 8.0;
  double encoder_hz = 55.0;
  double force_plate_hz = 192.0;
};

struct ScenarioConfig {
  LegPressParams params;
  MotionKind motion = MotionKind::sinusoid;
  SinusoidMotion sinusoid;
  ForceProfile force_profile;
  double lead_in_s = 2.0;
  double lead_out_s = 2.0;
  StereoCalibration camera;
  RailPose rail;
  NoiseConfig noise;
  SensorRates rates;
  /// Added to camera timestamps (unsynchronized clocks).
  double camera_clock_offset_s = 0.0;
  std::uint64_t seed = 1;

  std::string trial_id = "sim";
  std::string subject_id = "S01";
  int session_week = 1;
  Leg leg = Leg::right;
  double load_fraction = 0.5;

  void validate() const;
  double duration_s() const;
  /// Interval over which the sled moves.
  double motion_start_s() const;
  double motion_end_s() const;
};

/// Ground-truth sampling rate of the simulator (and RK4 step rate).
inline constexpr double kTruthRateHz = 1000.0;

struct GroundTruthBundle {
  DisplacementSeries x_true;
  ForceSeries f_true;
  int rep_count_true = 0;
  Trajectory3D hip_path_3d;
};

struct SimulationOutput {
  KeypointTrack keypoints;
  EncoderStream encoder;
  ForceSeries force_plate;
  GroundTruthBundle truth;
};

/// Exact sled kinematics of a scenario: analytic in sinusoid mode, RK4 at
/// 1 kHz with cubic Hermite interpolation in force-profile mode.
class MotionModel {
 public:
  explicit MotionModel(const ScenarioConfig& cfg);

  double displacement(double t) const;
  double acceleration(double t) const;
  double force(double t) const;

 private:
  ScenarioConfig cfg_;
  std::vector<double> grid_x_;
  std::vector<double> grid_v_;
  double step_ = 1.0 / kTruthRateHz;
};

SimulationOutput simulate(const ScenarioConfig& cfg);

/// Files: scenario.cfg, calibration.txt, params.txt, keypoints.csv,
/// encoder.csv, force_plate.csv, manifest.csv, truth_displacement.csv,
/// truth_force.csv (+ force_profile.csv).
void write_simulation(const SimulationOutput& sim, const ScenarioConfig& cfg, const std::filesystem::path& dir);

ScenarioConfig read_scenario(const std::filesystem::path& path);
std::string format_scenario(const ScenarioConfig& cfg);

struct InvertCheckReport {
  CameraEstimate estimate;
  /// Against noise-free kinematics on the camera grid, over the estimate window.
  AccuracyReport displacement_vs_truth;
  AccuracyReport force_vs_truth;
  /// Against the emitted encoder and force-plate streams (evaluation path).
  SensorComparison sensors;
  int reps_true = 0;
  double peak_force_true = 0.0;
};

/// Simulate in memory and run the full estimation pipeline on the result.
InvertCheckReport invert_check(const ScenarioConfig& cfg, const PipelineConfig& pipeline = {});

/// Run the pipeline on files previously written by `write_simulation` and
/// score them against the ground truth of `dir/scenario.cfg`.
InvertCheckReport invert_check_dir(const std::filesystem::path& dir, const PipelineConfig& pipeline = {});

std::string format_invert_check(const InvertCheckReport& report);

/// Longitudinal cohort: every subject trains `weeks` sessions with both legs
/// at both loads; range of motion and cadence of the involved (right) leg rise
/// so that its true peak force grows linearly by `peak_force_gain` from the
/// first to the last week.
struct CohortConfig {
  int subjects = 4;
  int weeks = 12;
  double peak_force_gain = 0.095;
  std::vector<double> load_fractions{0.30, 0.50};
  std::uint64_t seed = 1;
  ScenarioConfig base;
};

std::vector<ScenarioConfig> make_cohort(const CohortConfig& cohort);

/// Simulate every trial into `dir/<trial_id>/` and write `dir/manifest.csv`.
void write_cohort(const CohortConfig& cohort, const std::filesystem::path& dir);

}  // namespace legscreen
