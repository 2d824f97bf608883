#include "legscreen/series.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "legscreen/errors.hpp"

namespace legscreen {

std::string_view to_string(SeriesSource source) {
  switch (source) {
    case SeriesSource::camera: return "camera";
    case SeriesSource::encoder: return "encoder";
    case SeriesSource::force_plate: return "force_plate";
    case SeriesSource::truth: return "truth";
  }
  return "camera";
}

SeriesSource parse_series_source(std::string_view text) {
  if (text == "camera") return SeriesSource::camera;
  if (text == "encoder") return SeriesSource::encoder;
  if (text == "force_plate") return SeriesSource::force_plate;
  if (text == "truth") return SeriesSource::truth;
  fail(ErrorKind::invalid_argument, "unknown series source '" + std::string(text) + "'");
}

double uniform_step(std::span<const double> t, double rel_tol) {
  if (t.size() < 2) fail(ErrorKind::insufficient_data, "need at least 2 samples for a step");
  const double step = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(step > 0.0)) fail(ErrorKind::resample_required, "timestamps are not increasing");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - step) > rel_tol * step)
      fail(ErrorKind::resample_required,
           "timestamps are not uniformly spaced (sample " + std::to_string(i) + ")");
  }
  return step;
}

bool is_uniform(std::span<const double> t, double rel_tol) {
  try {
    uniform_step(t, rel_tol);
    return true;
  } catch (const Error&) {
    return false;
  }
}

double median_interval(std::span<const double> t) {
  if (t.size() < 2) fail(ErrorKind::insufficient_data, "need at least 2 samples for an interval");
  std::vector<double> d(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) d[i - 1] = t[i] - t[i - 1];
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  if (d.size() % 2 == 1) return d[mid];
  const double upper = d[mid];
  const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<double> uniform_grid(double t0, double step, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = t0 + static_cast<double>(i) * step;
  return g;
}

std::vector<double> interpolate_linear(std::span<const double> t, std::span<const double> v,
                                       std::span<const double> query) {
  if (t.size() != v.size() || t.empty())
    fail(ErrorKind::invalid_argument, "interpolate_linear: bad sample arrays");
  std::vector<double> out(query.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    const double q = query[i];
    if (q <= t.front()) {
      out[i] = v.front();
      continue;
    }
    if (q >= t.back()) {
      out[i] = v.back();
      continue;
    }
    // Queries are usually sorted; restart the scan only when they are not.
    if (k + 1 >= t.size() || t[k] > q) k = 0;
    while (t[k + 1] < q) ++k;
    const double w = (q - t[k]) / (t[k + 1] - t[k]);
    out[i] = v[k] + w * (v[k + 1] - v[k]);
  }
  return out;
}

DisplacementSeries resample_uniform(const DisplacementSeries& series) {
  if (series.size() < 2) fail(ErrorKind::insufficient_data, "resample: need at least 2 samples");
  const double step = median_interval(series.timestamps);
  const double span = series.timestamps.back() - series.timestamps.front();
  const auto n = static_cast<std::size_t>(std::floor(span / step + 1e-9)) + 1;
  DisplacementSeries out;
  out.source = series.source;
  out.timestamps = uniform_grid(series.timestamps.front(), step, n);
  out.displacement = interpolate_linear(series.timestamps, series.displacement, out.timestamps);
  return out;
}

DisplacementSeries encoder_displacement(const EncoderStream& encoder, double r1_m) {
  if (encoder.counts.size() != encoder.timestamps.size())
    fail(ErrorKind::invalid_argument, "encoder: counts and timestamps differ in length");
  if (encoder.counts_per_rev <= 0) fail(ErrorKind::invalid_argument, "encoder: counts_per_rev must be > 0");
  if (!(r1_m > 0.0)) fail(ErrorKind::singular_parameter, "encoder: r1 must be > 0");
  DisplacementSeries out;
  out.source = SeriesSource::encoder;
  out.timestamps = encoder.timestamps;
  out.displacement.reserve(encoder.size());
  const double metres_per_count = 2.0 * std::numbers::pi * r1_m / encoder.counts_per_rev;
  const long long zero = encoder.counts.empty() ? 0 : encoder.counts.front();
  for (long long c : encoder.counts) out.displacement.push_back(static_cast<double>(c - zero) * metres_per_count);
  return out;
}

}  // namespace legscreen
