#pragma once

#include <array>
#include <optional>

#include "legscreen/series.hpp"
#include "legscreen/stereo_geometry.hpp"

namespace legscreen {

/// Principal axes of a point cloud, sorted by descending variance.
struct PrincipalAxes {
  Vec3 centroid = Vec3::Zero();
  std::array<double, 3> eigenvalues{};
  std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
};

/// Plane through `centroid` with unit `normal`; `basis` spans the plane.
struct MotionPlane {
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  std::array<Vec3, 2> basis{Vec3::UnitX(), Vec3::UnitY()};
  /// Covariance eigenvalues of the fitted cloud, descending.
  std::array<double, 3> eigenvalues{};
  /// Largest two eigenvalues coincide (relative 1e-9), so the normal is not
  /// uniquely determined by the data.
  bool eigenvalue_tie = false;
};

/// Which direction the pipeline treats as depth noise before projecting.
enum class NoiseAxis {
  /// First principal component.
  first_component,
  /// Camera-to-centroid viewing ray restricted to the span of the first two
  /// principal components. Identical to `first_component` when depth noise
  /// dominates; stays on the noise axis when motion variance is comparable.
  viewing_ray,
  /// No projection.
  none,
};

struct StartPolicy {
  enum class Kind { first_sample, mean_first_n };
  Kind kind = Kind::mean_first_n;
  int n = 3;

  static StartPolicy first_sample() { return {Kind::first_sample, 1}; }
  static StartPolicy mean_first_n(int count) { return {Kind::mean_first_n, count}; }
};

PrincipalAxes principal_axes(const Trajectory3D& traj);

/// PCA plane whose normal is the direction of maximum variance (sign: Z >= 0,
/// then X >= 0). Throws degenerate_geometry for collinear clouds.
MotionPlane fit_motion_plane(const Trajectory3D& traj);

/// PCA plane whose normal is `direction` restricted to the span of the first
/// two principal axes.
MotionPlane fit_motion_plane_along(const Trajectory3D& traj, const Vec3& direction);

Trajectory3D project_to_plane(const Trajectory3D& traj, const MotionPlane& plane);

DisplacementSeries displacement_from_start(const Trajectory3D& traj,
                                           StartPolicy start = StartPolicy::mean_first_n(3));

/// True when the cloud has no spread off its principal line (l2 <= 1e-12 l1).
bool is_collinear(const PrincipalAxes& axes);

struct DepthNoiseRemoval {
  Trajectory3D projected;
  PrincipalAxes axes;
  /// Empty when the axis is `none` or the cloud is collinear.
  std::optional<MotionPlane> plane;
  bool collinear = false;
};

/// Fit and project according to `axis`. A collinear cloud is returned
/// unchanged since the line already lies in every plane containing it.
DepthNoiseRemoval remove_depth_noise(const Trajectory3D& traj, NoiseAxis axis);

}  // namespace legscreen
