#include "legscreen/stereo_geometry.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "legscreen/errors.hpp"

namespace legscreen {

namespace {

constexpr double kMinDisparityPx = 1e-6;
constexpr double kNormalEquationMaxCondition = 1e8;
constexpr double kMaxSystemCondition = 1e12;

using Mat34 = Eigen::Matrix<double, 3, 4>;
using Row4 = Eigen::Matrix<double, 1, 4>;

Mat34 projection_matrix(const StereoCalibration& c, double tx) {
  Eigen::Matrix3d k;
  k << c.focal_length_px, 0.0, c.cx, 0.0, c.focal_length_px, c.cy, 0.0, 0.0, 1.0;
  Mat34 rt = Mat34::Zero();
  rt.leftCols<3>().setIdentity();
  rt(0, 3) = tx;
  return k * rt;
}

}  // namespace

void StereoCalibration::validate() const {
  std::ostringstream err;
  if (!(focal_length_px > 0.0) || !std::isfinite(focal_length_px)) err << "focal_px must be > 0; ";
  if (!(baseline_m > 0.0) || !std::isfinite(baseline_m)) err << "baseline_m must be > 0; ";
  if (width <= 0 || height <= 0) err << "image size must be positive; ";
  if (!(cx >= 0.0 && cx <= width) || !(cy >= 0.0 && cy <= height))
    err << "principal point outside image bounds; ";
  if (!err.str().empty()) fail(ErrorKind::invalid_argument, "calibration: " + err.str());
}

void KeypointTrack::validate() const {
  if (left.size() != timestamps.size() || right.size() != timestamps.size())
    fail(ErrorKind::invalid_argument, "keypoint track: left/right/timestamps lengths differ");
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1]))
      fail(ErrorKind::invalid_argument, "keypoint track: timestamps not strictly increasing");
  }
}

std::optional<StereoPair> regulate_y(const Keypoint2D& left, const Keypoint2D& right,
                                     double min_confidence) {
  if (!left.detected(min_confidence) || !right.detected(min_confidence)) return std::nullopt;
  const double y = 0.5 * (left.y + right.y);
  StereoPair out{left, right};
  out.left.y = y;
  out.right.y = y;
  return out;
}

Vec3 triangulate(const Keypoint2D& left, const Keypoint2D& right, const StereoCalibration& calib) {
  const double disparity = left.x - right.x;
  if (!(disparity > kMinDisparityPx)) {
    std::ostringstream msg;
    msg << "triangulate: disparity " << disparity << " px gives no finite depth";
    fail(ErrorKind::non_finite_depth, msg.str());
  }

  const Mat34 pl = projection_matrix(calib, 0.0);
  const Mat34 pr = projection_matrix(calib, -calib.baseline_m);

  Eigen::Matrix<double, 4, 4> rows;
  rows.row(0) = left.x * pl.row(2) - pl.row(0);
  rows.row(1) = left.y * pl.row(2) - pl.row(1);
  rows.row(2) = right.x * pr.row(2) - pr.row(0);
  rows.row(3) = right.y * pr.row(2) - pr.row(1);

  // Dehomogenize with W = 1: A [X Y Z]^T = -a4.
  const Eigen::Matrix<double, 4, 3> a = rows.leftCols<3>();
  const Eigen::Vector4d b = -rows.col(3);

  const Eigen::Matrix3d ata = a.transpose() * a;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(ata, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();

  Vec3 p;
  if (lo > 0.0 && hi / lo <= kNormalEquationMaxCondition) {
    p = ata.ldlt().solve(a.transpose() * b);
  } else {
    const Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double s_min = svd.singularValues().minCoeff();
    const double s_max = svd.singularValues().maxCoeff();
    if (!(s_min > 0.0) || s_max / s_min > kMaxSystemCondition)
      fail(ErrorKind::ill_conditioned, "triangulate: DLT system is rank deficient");
    p = svd.solve(b);
  }

  if (!p.allFinite() || !(p.z() > 0.0))
    fail(ErrorKind::non_finite_depth, "triangulate: solution has no positive finite depth");
  return p;
}

StereoPair project(const Vec3& point, const StereoCalibration& calib) {
  if (!(point.z() > 0.0)) fail(ErrorKind::behind_camera, "project: point has Z <= 0");
  const double f = calib.focal_length_px;
  const double y = f * point.y() / point.z() + calib.cy;
  StereoPair out;
  out.left = {f * point.x() / point.z() + calib.cx, y, 1.0};
  out.right = {f * (point.x() - calib.baseline_m) / point.z() + calib.cx, y, 1.0};
  return out;
}

double reprojection_error(const Vec3& point, const Keypoint2D& left, const Keypoint2D& right,
                          const StereoCalibration& calib) {
  if (!(point.z() > 0.0)) fail(ErrorKind::behind_camera, "reprojection_error: point has Z <= 0");
  const StereoPair proj = project(point, calib);
  const double dxl = proj.left.x - left.x;
  const double dyl = proj.left.y - left.y;
  const double dxr = proj.right.x - right.x;
  const double dyr = proj.right.y - right.y;
  return std::sqrt((dxl * dxl + dyl * dyl + dxr * dxr + dyr * dyr) / 4.0);
}

Trajectory3D track_to_trajectory(const KeypointTrack& track, const StereoCalibration& calib,
                                 double min_confidence) {
  track.validate();
  calib.validate();
  if (track.size() == 0) fail(ErrorKind::insufficient_data, "keypoint track is empty");

  Trajectory3D out;
  out.timestamps.reserve(track.size());
  out.points.reserve(track.size());
  for (std::size_t i = 0; i < track.size(); ++i) {
    const auto pair = regulate_y(track.left[i], track.right[i], min_confidence);
    if (!pair) continue;
    out.timestamps.push_back(track.timestamps[i]);
    out.points.push_back(triangulate(pair->left, pair->right, calib));
  }
  if (out.size() < 2) {
    std::ostringstream msg;
    msg << "track '" << track.joint_name << "' has " << out.size()
        << " valid stereo frames; at least 2 are required";
    fail(ErrorKind::insufficient_data, msg.str());
  }
  return out;
}

}  // namespace legscreen
