#include "legscreen/trajectory_analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "legscreen/errors.hpp"

namespace legscreen {

namespace {

constexpr double kCollinearRatio = 1e-12;
constexpr double kTieRatio = 1e-9;

// Z >= 0, ties broken by X >= 0, then Y >= 0.
Vec3 oriented(const Vec3& v) {
  const double eps = 1e-12;
  double key = v.z();
  if (std::abs(key) <= eps) key = v.x();
  if (std::abs(key) <= eps) key = v.y();
  return key < 0.0 ? Vec3(-v) : v;
}

MotionPlane plane_with_normal(const PrincipalAxes& axes, const Vec3& normal) {
  MotionPlane plane;
  plane.centroid = axes.centroid;
  plane.normal = oriented(normal.normalized());
  plane.eigenvalues = axes.eigenvalues;
  plane.eigenvalue_tie =
      axes.eigenvalues[0] - axes.eigenvalues[1] <= kTieRatio * std::abs(axes.eigenvalues[0]);

  // First in-plane axis: the highest-variance principal axis that is not the
  // normal, made exactly orthogonal to it.
  Vec3 first = Vec3::Zero();
  for (const Vec3& axis : axes.axes) {
    const Vec3 candidate = axis - axis.dot(plane.normal) * plane.normal;
    if (candidate.norm() > 0.5) {
      first = candidate.normalized();
      break;
    }
  }
  plane.basis[0] = oriented(first);
  plane.basis[1] = plane.normal.cross(plane.basis[0]);
  return plane;
}

}  // namespace

PrincipalAxes principal_axes(const Trajectory3D& traj) {
  if (traj.size() < 3) fail(ErrorKind::insufficient_data, "PCA needs at least 3 points");
  PrincipalAxes out;
  for (const Vec3& p : traj.points) out.centroid += p;
  out.centroid /= static_cast<double>(traj.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : traj.points) {
    const Vec3 d = p - out.centroid;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(traj.size());

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.info() != Eigen::Success)
    fail(ErrorKind::degenerate_geometry, "covariance eigendecomposition failed");
  // Eigen sorts ascending.
  for (int i = 0; i < 3; ++i) {
    out.eigenvalues[i] = std::max(0.0, eig.eigenvalues()(2 - i));
    out.axes[i] = oriented(eig.eigenvectors().col(2 - i));
  }
  return out;
}

bool is_collinear(const PrincipalAxes& axes) {
  return axes.eigenvalues[1] <= kCollinearRatio * axes.eigenvalues[0];
}

MotionPlane fit_motion_plane(const Trajectory3D& traj) {
  const PrincipalAxes axes = principal_axes(traj);
  if (is_collinear(axes))
    fail(ErrorKind::degenerate_geometry, "point cloud is collinear; plane is undefined");
  return plane_with_normal(axes, axes.axes[0]);
}

MotionPlane fit_motion_plane_along(const Trajectory3D& traj, const Vec3& direction) {
  const PrincipalAxes axes = principal_axes(traj);
  if (is_collinear(axes))
    fail(ErrorKind::degenerate_geometry, "point cloud is collinear; plane is undefined");
  const Vec3 d = direction.normalized();
  const Vec3 in_span = axes.axes[0] * axes.axes[0].dot(d) + axes.axes[1] * axes.axes[1].dot(d);
  if (in_span.norm() < 1e-9)
    fail(ErrorKind::degenerate_geometry, "direction is orthogonal to the principal plane");
  return plane_with_normal(axes, in_span);
}

Trajectory3D project_to_plane(const Trajectory3D& traj, const MotionPlane& plane) {
  Trajectory3D out;
  out.timestamps = traj.timestamps;
  out.points.reserve(traj.size());
  for (const Vec3& p : traj.points) {
    out.points.push_back(p - (p - plane.centroid).dot(plane.normal) * plane.normal);
  }
  return out;
}

DisplacementSeries displacement_from_start(const Trajectory3D& traj, StartPolicy start) {
  if (traj.size() == 0) fail(ErrorKind::insufficient_data, "trajectory is empty");
  if (traj.timestamps.size() != traj.size())
    fail(ErrorKind::invalid_argument, "trajectory timestamps and points differ in length");

  std::size_t n = 1;
  if (start.kind == StartPolicy::Kind::mean_first_n) {
    if (start.n < 1) fail(ErrorKind::invalid_argument, "start policy needs n >= 1");
    n = std::min<std::size_t>(static_cast<std::size_t>(start.n), traj.size());
  }
  Vec3 origin = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) origin += traj.points[i];
  origin /= static_cast<double>(n);

  DisplacementSeries out;
  out.source = SeriesSource::camera;
  out.timestamps = traj.timestamps;
  out.displacement.reserve(traj.size());
  for (const Vec3& p : traj.points) out.displacement.push_back((p - origin).norm());
  return out;
}

DepthNoiseRemoval remove_depth_noise(const Trajectory3D& traj, NoiseAxis axis) {
  DepthNoiseRemoval out;
  out.axes = principal_axes(traj);
  out.collinear = is_collinear(out.axes);
  if (axis == NoiseAxis::none || out.collinear) {
    out.projected = traj;
    return out;
  }
  out.plane = axis == NoiseAxis::first_component
                  ? plane_with_normal(out.axes, out.axes.axes[0])
                  : fit_motion_plane_along(traj, out.axes.centroid);
  out.projected = project_to_plane(traj, *out.plane);
  return out;
}

}  // namespace legscreen
