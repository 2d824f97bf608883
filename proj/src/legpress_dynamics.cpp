#include "legscreen/legpress_dynamics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "legscreen/errors.hpp"

namespace legscreen {

namespace {

constexpr double kMinCosine = 1e-6;

void require_nonnegative(double value, const char* name, std::ostringstream& err) {
  if (!(value >= 0.0) || !std::isfinite(value)) err << name << " must be >= 0; ";
}

}  // namespace

void LegPressParams::validate() const {
  std::ostringstream err;
  require_nonnegative(patient_mass_kg, "m_kg", err);
  require_nonnegative(sled_mass_kg, "m_s_kg", err);
  require_nonnegative(stack_mass_kg, "m_w_kg", err);
  require_nonnegative(pulley_inertia_kgm2, "I_kgm2", err);
  require_nonnegative(r2_m, "r2_m", err);
  if (!std::isfinite(alpha_rad) || !std::isfinite(beta_rad)) err << "angles must be finite; ";
  if (!(g > 0.0) || !std::isfinite(g)) err << "g must be > 0; ";
  if (!err.str().empty()) fail(ErrorKind::invalid_argument, "leg press params: " + err.str());
  if (!(r1_m > 0.0) || !std::isfinite(r1_m))
    fail(ErrorKind::singular_parameter, "leg press params: r1_m must be > 0");
  if (!(std::abs(std::cos(alpha_rad + beta_rad)) > kMinCosine))
    fail(ErrorKind::model_singularity, "leg press params: cos(alpha + beta) is zero");
}

double LegPressParams::effective_mass() const {
  return patient_mass_kg + sled_mass_kg + pulley_inertia_kgm2 / (r1_m * r1_m);
}

double LegPressParams::static_load() const {
  return (r2_m / r1_m) * stack_mass_kg * g + (patient_mass_kg + sled_mass_kg) * g * std::sin(beta_rad);
}

void SmoothingConfig::validate() const {
  if (window < 3 || window % 2 == 0)
    fail(ErrorKind::invalid_argument, "smoothing window must be odd and >= 3");
  if (method == SmoothingMethod::savitzky_golay && (poly_order < 0 || poly_order >= window))
    fail(ErrorKind::invalid_argument, "Savitzky-Golay order must be in [0, window)");
}

std::vector<double> savitzky_golay_coefficients(int window, int poly_order) {
  SmoothingConfig{SmoothingMethod::savitzky_golay, window, poly_order}.validate();
  const int half = window / 2;
  Eigen::MatrixXd vander(window, poly_order + 1);
  for (int i = 0; i < window; ++i) {
    double v = 1.0;
    for (int j = 0; j <= poly_order; ++j) {
      vander(i, j) = v;
      v *= static_cast<double>(i - half);
    }
  }
  // Row 0 of the pseudo-inverse evaluates the fitted polynomial at the centre.
  const Eigen::MatrixXd pinv = vander.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<double> coeffs(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i) coeffs[static_cast<std::size_t>(i)] = pinv(0, i);
  // Enforce exact symmetry so constant and odd inputs are reproduced without
  // left/right rounding drift.
  for (int i = 0; i < half; ++i) {
    const double avg = 0.5 * (coeffs[static_cast<std::size_t>(i)] +
                              coeffs[static_cast<std::size_t>(window - 1 - i)]);
    coeffs[static_cast<std::size_t>(i)] = avg;
    coeffs[static_cast<std::size_t>(window - 1 - i)] = avg;
  }
  return coeffs;
}

std::vector<double> smooth_values(std::span<const double> values, const SmoothingConfig& cfg) {
  cfg.validate();
  const auto window = static_cast<std::size_t>(cfg.window);
  if (values.size() < window) {
    std::ostringstream msg;
    msg << "series of " << values.size() << " samples is shorter than smoothing window " << window;
    fail(ErrorKind::insufficient_data, msg.str());
  }
  const std::vector<double> weights =
      cfg.method == SmoothingMethod::savitzky_golay
          ? savitzky_golay_coefficients(cfg.window, cfg.poly_order)
          : std::vector<double>(window, 1.0 / static_cast<double>(window));

  const std::size_t half = window / 2;
  const std::size_t n = values.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < window; ++k) {
      // Index into the endpoint-replicated signal.
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i + k) - static_cast<std::ptrdiff_t>(half);
      const std::size_t idx = j < 0 ? 0 : (static_cast<std::size_t>(j) >= n ? n - 1 : static_cast<std::size_t>(j));
      acc += weights[k] * values[idx];
    }
    out[i] = acc;
  }
  return out;
}

DisplacementSeries smooth(const DisplacementSeries& series, const SmoothingConfig& cfg) {
  uniform_step(series.timestamps);
  DisplacementSeries out;
  out.source = series.source;
  out.timestamps = series.timestamps;
  out.displacement = smooth_values(series.displacement, cfg);
  return out;
}

std::vector<double> second_derivative(const DisplacementSeries& series) {
  const std::size_t n = series.size();
  if (n < 3 || series.displacement.size() != n)
    fail(ErrorKind::insufficient_data, "second derivative needs at least 3 samples");
  const double h = uniform_step(series.timestamps);
  const double inv_h2 = 1.0 / (h * h);
  const auto& x = series.displacement;

  std::vector<double> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (x[i - 1] - 2.0 * x[i] + x[i + 1]) * inv_h2;
  if (n == 3) {
    out[0] = out[2] = out[1];
  } else {
    out[0] = (2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) * inv_h2;
    out[n - 1] = (2.0 * x[n - 1] - 5.0 * x[n - 2] + 4.0 * x[n - 3] - x[n - 4]) * inv_h2;
  }
  return out;
}

double strap_tension(double x_ddot, const LegPressParams& p) {
  if (!(p.r1_m > 0.0)) fail(ErrorKind::singular_parameter, "strap tension: r1 must be > 0");
  return (p.pulley_inertia_kgm2 * x_ddot / p.r1_m + p.stack_mass_kg * p.g * p.r2_m) / p.r1_m;
}

double force_from_acceleration(double x_ddot, const LegPressParams& p) {
  return (p.effective_mass() * x_ddot + p.static_load()) / std::cos(p.alpha_rad + p.beta_rad);
}

double acceleration_from_force(double force, const LegPressParams& p) {
  return (force * std::cos(p.alpha_rad + p.beta_rad) - p.static_load()) / p.effective_mass();
}

ForceSeries estimate_force(const DisplacementSeries& series, const LegPressParams& p,
                           const SmoothingConfig& cfg) {
  p.validate();
  cfg.validate();
  if (cfg.method == SmoothingMethod::savitzky_golay && cfg.poly_order < 2)
    fail(ErrorKind::invalid_argument, "differentiating twice needs Savitzky-Golay order >= 2");
  uniform_step(series.timestamps);

  DisplacementSeries smoothed;
  smoothed.timestamps = series.timestamps;
  smoothed.displacement = smooth_values(series.displacement, cfg);
  const std::vector<double> accel = second_derivative(smoothed);

  ForceSeries out;
  out.source = SeriesSource::camera;
  out.timestamps = series.timestamps;
  out.force.reserve(accel.size());
  for (double a : accel) out.force.push_back(force_from_acceleration(a, p));
  return out;
}

}  // namespace legscreen
