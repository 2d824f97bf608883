#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace legscreen {

using Vec3 = Eigen::Vector3d;

/// Detections below this confidence are treated as missing.
inline constexpr double kMinConfidence = 0.1;

/// Rectified pinhole stereo rig. Both views share intrinsics; the right camera
/// sits `baseline_m` along +X of the left camera, which defines the world frame.
struct StereoCalibration {
  double focal_length_px = 700.0;
  double cx = 640.0;
  double cy = 360.0;
  double baseline_m = 0.12;
  int width = 1280;
  int height = 720;

  void validate() const;
};

struct Keypoint2D {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  bool detected(double min_confidence = kMinConfidence) const {
    return confidence > 0.0 && confidence >= min_confidence;
  }
};

struct StereoPair {
  Keypoint2D left;
  Keypoint2D right;
};

/// One joint tracked through both views. Sample i of `left`/`right` was taken
/// at `timestamps[i]`.
struct KeypointTrack {
  std::string joint_name = "hip";
  std::vector<double> timestamps;
  std::vector<Keypoint2D> left;
  std::vector<Keypoint2D> right;

  std::size_t size() const { return timestamps.size(); }
  void validate() const;
};

/// Points are in the left-camera frame (X right, Y down, Z forward), meters.
struct Trajectory3D {
  std::vector<double> timestamps;
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
};

/// Replace both vertical coordinates by their mean, restoring the epipolar
/// constraint that independent per-view detections break. Returns nullopt when
/// either detection is missing.
std::optional<StereoPair> regulate_y(const Keypoint2D& left, const Keypoint2D& right,
                                     double min_confidence = kMinConfidence);

/// DLT triangulation: stacks the two projection constraints of each view into a
/// 4x3 system and solves it in the least-squares sense. Normal equations are
/// used unless their condition number exceeds 1e8, in which case the system is
/// solved by SVD.
Vec3 triangulate(const Keypoint2D& left, const Keypoint2D& right, const StereoCalibration& calib);

/// Pinhole projection of a left-frame point into both rectified views.
StereoPair project(const Vec3& point, const StereoCalibration& calib);

/// RMS of the four pixel residuals (x and y in each view).
double reprojection_error(const Vec3& point, const Keypoint2D& left, const Keypoint2D& right,
                          const StereoCalibration& calib);

/// Regulate and triangulate every frame. Frames with a missing detection in
/// either view are dropped, so the output timestamps are a subset of the input.
Trajectory3D track_to_trajectory(const KeypointTrack& track, const StereoCalibration& calib,
                                 double min_confidence = kMinConfidence);

}  // namespace legscreen
