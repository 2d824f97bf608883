#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace legscreen {

enum class ErrorKind {
  invalid_argument,
  insufficient_data,
  non_finite_depth,
  ill_conditioned,
  behind_camera,
  degenerate_geometry,
  resample_required,
  model_singularity,
  singular_parameter,
  undefined_symmetry,
  zero_range,
  scenario,
  data,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// File-level problem: unreadable path or malformed content. `line` is 1-based,
/// 0 when the problem is not tied to a line.
class DataError : public Error {
 public:
  DataError(std::string path, std::size_t line, const std::string& what);

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace legscreen
