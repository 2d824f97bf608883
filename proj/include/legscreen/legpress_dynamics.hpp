#pragma once

#include <span>
#include <vector>

#include "legscreen/series.hpp"

namespace legscreen {

/// Machine and patient constants of the sled/pulley free-body model. The
/// default machine constants are placeholders, not measured values.
struct LegPressParams {
  double patient_mass_kg = 75.0;
  double sled_mass_kg = 30.0;
  double stack_mass_kg = 37.5;
  double pulley_inertia_kgm2 = 0.02;
  double r1_m = 0.1;  ///< pulley carrying the sled strap; theta = x / r1
  double r2_m = 0.1;  ///< pulley carrying the weight stack
  double alpha_rad = 0.2;  ///< foot plate to vertical
  double beta_rad = 0.35;  ///< rail to horizontal
  double g = 9.80665;
  bool calibrated = false;

  void validate() const;

  /// m + m_s + I / r1^2: mass the foot plate accelerates along the rail.
  double effective_mass() const;
  /// Force along the rail needed to hold the sled still: (r2/r1) m_w g + (m + m_s) g sin(beta).
  double static_load() const;
};

enum class SmoothingMethod { moving_average, savitzky_golay };

struct SmoothingConfig {
  SmoothingMethod method = SmoothingMethod::savitzky_golay;
  int window = 9;
  int poly_order = 3;

  void validate() const;
};

/// Least-squares polynomial smoothing weights for the window centre.
std::vector<double> savitzky_golay_coefficients(int window, int poly_order);

/// Smooth with endpoint-replication padding; output length equals input.
std::vector<double> smooth_values(std::span<const double> values, const SmoothingConfig& cfg);
DisplacementSeries smooth(const DisplacementSeries& series, const SmoothingConfig& cfg);

/// Central second differences in the interior, second-order one-sided
/// stencils at the two ends. Requires uniform timestamps.
std::vector<double> second_derivative(const DisplacementSeries& series);

/// Strap tension from the pulley balance I theta'' = T r1 - m_w g r2 with
/// theta = x / r1.
double strap_tension(double x_ddot, const LegPressParams& p);

/// Foot-plate force for a given sled acceleration along the rail.
double force_from_acceleration(double x_ddot, const LegPressParams& p);

/// Inverse of `force_from_acceleration`.
double acceleration_from_force(double force, const LegPressParams& p);

/// Smooth, differentiate twice, and map acceleration to foot-plate force.
/// Timestamps of the result equal those of the input.
ForceSeries estimate_force(const DisplacementSeries& series, const LegPressParams& p,
                           const SmoothingConfig& cfg);

}  // namespace legscreen
