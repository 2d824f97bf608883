#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace legscreen {

enum class SeriesSource { camera, encoder, force_plate, truth };

std::string_view to_string(SeriesSource source);
SeriesSource parse_series_source(std::string_view text);

/// Start-referenced displacement x(t), meters.
struct DisplacementSeries {
  std::vector<double> timestamps;
  std::vector<double> displacement;
  SeriesSource source = SeriesSource::camera;

  std::size_t size() const { return timestamps.size(); }
};

/// Foot-plate force f(t), newtons.
struct ForceSeries {
  std::vector<double> timestamps;
  std::vector<double> force;
  SeriesSource source = SeriesSource::camera;

  std::size_t size() const { return timestamps.size(); }
};

/// Rotary encoder stream: cumulative counts of the pulley that carries the
/// sled strap.
struct EncoderStream {
  int counts_per_rev = 10000;
  std::vector<double> timestamps;
  std::vector<long long> counts;

  std::size_t size() const { return timestamps.size(); }
};

/// Sled travel from encoder counts: x = 2 pi r1 * counts / counts_per_rev,
/// referenced to the first sample.
DisplacementSeries encoder_displacement(const EncoderStream& encoder, double r1_m);

/// Uniform step of `t`, or throws resample_required when the spacing deviates
/// from the mean step by more than `rel_tol` of it.
double uniform_step(std::span<const double> t, double rel_tol = 1e-6);
bool is_uniform(std::span<const double> t, double rel_tol = 1e-6);

double median_interval(std::span<const double> t);

/// `t0 + i*step`, computed without accumulation so grids written to text and
/// read back stay bit-identical.
std::vector<double> uniform_grid(double t0, double step, std::size_t n);

/// Piecewise-linear interpolation of (t, v) at `query`; values outside the
/// sampled span are clamped to the end samples. `t` must be increasing.
std::vector<double> interpolate_linear(std::span<const double> t, std::span<const double> v,
                                       std::span<const double> query);

/// Linear resampling onto a uniform grid at the median sampling interval,
/// starting at the first timestamp.
DisplacementSeries resample_uniform(const DisplacementSeries& series);

}  // namespace legscreen
