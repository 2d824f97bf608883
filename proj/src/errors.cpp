#include "legscreen/errors.hpp"

namespace legscreen {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::non_finite_depth: return "non-finite depth";
    case ErrorKind::ill_conditioned: return "ill-conditioned system";
    case ErrorKind::behind_camera: return "point behind camera";
    case ErrorKind::degenerate_geometry: return "degenerate geometry";
    case ErrorKind::resample_required: return "resample required";
    case ErrorKind::model_singularity: return "model singularity";
    case ErrorKind::singular_parameter: return "singular parameter";
    case ErrorKind::undefined_symmetry: return "undefined symmetry";
    case ErrorKind::zero_range: return "zero range";
    case ErrorKind::scenario: return "scenario error";
    case ErrorKind::data: return "data error";
  }
  return "unknown";
}

namespace {

std::string locate(const std::string& path, std::size_t line, const std::string& what) {
  std::string out = path;
  if (line > 0) out += ":" + std::to_string(line);
  return out + ": " + what;
}

}  // namespace

DataError::DataError(std::string path, std::size_t line, const std::string& what)
    : Error(ErrorKind::data, locate(path, line, what)), path_(std::move(path)), line_(line) {}

}  // namespace legscreen
