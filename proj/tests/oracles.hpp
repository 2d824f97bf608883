#pragma once

// Reference computations used only by tests. Each one takes a different route
// from the library code it checks: plain arrays instead of Eigen, brute-force
// search instead of closed forms, tabulated constants instead of generated ones.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

struct EigenSystem {
  Vec3 values;                  // descending
  std::array<Vec3, 3> vectors;  // unit, vectors[k] pairs with values[k]
};

/// Cyclic Jacobi rotations on a symmetric 3x3 matrix.
inline EigenSystem jacobi_eigen(Mat3 a) {
  Mat3 v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off < 1e-300) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });
  EigenSystem out;
  for (int k = 0; k < 3; ++k) {
    out.values[k] = a[order[k]][order[k]];
    for (int r = 0; r < 3; ++r) out.vectors[k][r] = v[r][order[k]];
  }
  return out;
}

/// Population covariance of a point cloud given as rows.
inline Mat3 covariance(const std::vector<Vec3>& pts) {
  Vec3 mean{0, 0, 0};
  for (const auto& p : pts)
    for (int i = 0; i < 3; ++i) mean[i] += p[i];
  for (double& m : mean) m /= static_cast<double>(pts.size());
  Mat3 c{};
  for (const auto& p : pts)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]);
  for (auto& row : c)
    for (double& x : row) x /= static_cast<double>(pts.size());
  return c;
}

struct Pixel {
  double x, y;
};

/// Pinhole projection into a rectified pair whose right camera sits at +b on X.
inline std::array<Pixel, 2> project(const Vec3& p, double f, double cx, double cy, double b) {
  return {Pixel{f * p[0] / p[2] + cx, f * p[1] / p[2] + cy}, Pixel{f * (p[0] - b) / p[2] + cx, f * p[1] / p[2] + cy}};
}

inline double reprojection_rms(const Vec3& p, Pixel l, Pixel r, double f, double cx, double cy, double b) {
  const auto pr = project(p, f, cx, cy, b);
  const double s = std::pow(pr[0].x - l.x, 2) + std::pow(pr[0].y - l.y, 2) + std::pow(pr[1].x - r.x, 2) +
                   std::pow(pr[1].y - r.y, 2);
  return std::sqrt(s / 4.0);
}

/// Grid pattern search for the point minimizing reprojection error: recentre on
/// the best grid node until it stays put, then halve the span.
inline Vec3 grid_triangulate(Pixel l, Pixel r, double f, double cx, double cy, double b, Vec3 centre,
                             double half_span) {
  Vec3 best = centre;
  double best_err = reprojection_rms(best, l, r, f, cx, cy, b);
  double span = half_span;
  const int n = 4;
  for (int level = 0; level < 60; ++level) {
    for (int step = 0; step < 500; ++step) {
      Vec3 level_best = best;
      for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j)
          for (int k = -n; k <= n; ++k) {
            const Vec3 p{best[0] + span * i / n, best[1] + span * j / n, best[2] + span * k / n};
            if (p[2] <= 0) continue;
            const double e = reprojection_rms(p, l, r, f, cx, cy, b);
            if (e < best_err) {
              best_err = e;
              level_best = p;
            }
          }
      if (level_best == best) break;
      best = level_best;
    }
    span *= 0.5;
  }
  return best;
}

/// Tabulated Savitzky-Golay smoothing weights (classic tables).
inline std::vector<double> savitzky_golay_table(int window, int order) {
  if (window == 5 && (order == 2 || order == 3)) {
    std::vector<double> c{-3, 12, 17, 12, -3};
    for (double& x : c) x /= 35.0;
    return c;
  }
  if (window == 7 && (order == 2 || order == 3)) {
    std::vector<double> c{-2, 3, 6, 7, 6, 3, -2};
    for (double& x : c) x /= 21.0;
    return c;
  }
  if (window == 9 && (order == 2 || order == 3)) {
    std::vector<double> c{-21, 14, 39, 54, 59, 54, 39, 14, -21};
    for (double& x : c) x /= 231.0;
    return c;
  }
  if (window == 7 && (order == 4 || order == 5)) {
    std::vector<double> c{5, -30, 75, 131, 75, -30, 5};
    for (double& x : c) x /= 231.0;
    return c;
  }
  return {};
}

/// Pulley balance, then sled balance along the rail, as two separate steps.
struct LegPress {
  double m, m_s, m_w, inertia, r1, r2, alpha, beta, g;
};

inline double tension(const LegPress& p, double x_ddot) {
  const double theta_ddot = x_ddot / p.r1;
  // I theta'' = T r1 - m_w g r2
  return (p.inertia * theta_ddot + p.m_w * p.g * p.r2) / p.r1;
}

inline double plate_force(const LegPress& p, double x_ddot) {
  // f cos(alpha + beta) - T - (m + m_s) g sin(beta) = (m + m_s) x''
  const double along_rail = (p.m + p.m_s) * x_ddot + tension(p, x_ddot) + (p.m + p.m_s) * p.g * std::sin(p.beta);
  return along_rail / std::cos(p.alpha + p.beta);
}

struct Line {
  double slope, intercept, r_squared;
};

/// Raw-sum normal equations (no centring) for y = a + b x.
inline Line least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  const double b = (n * sxy - sx * sy) / det;
  const double a = (sy * sxx - sx * sxy) / det;
  const double ym = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_res += std::pow(y[i] - (a + b * x[i]), 2);
    ss_tot += std::pow(y[i] - ym, 2);
  }
  return {b, a, 1.0 - ss_res / ss_tot};
}

}  // namespace oracle
