#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "legscreen/legpress_dynamics.hpp"
#include "legscreen/screening_metrics.hpp"
#include "legscreen/series.hpp"
#include "legscreen/stereo_geometry.hpp"

namespace legscreen {

namespace fs = std::filesystem;

/// Shortest decimal text that parses back to the same double, always carrying
/// a decimal point or exponent ("80.0", "0.125", "1e-07").
std::string format_real(double value);

double parse_real(std::string_view text, const std::string& path, std::size_t line);
long long parse_integer(std::string_view text, const std::string& path, std::size_t line);

/// Flat `key = value` text; `#` starts a comment, blank lines are ignored.
class KeyValueFile {
 public:
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };

  static KeyValueFile read(const fs::path& path);
  static KeyValueFile parse(std::string_view text, std::string path_label);

  bool has(std::string_view key) const;
  const Entry* find(std::string_view key) const;
  double real(std::string_view key) const;
  double real_or(std::string_view key, double fallback) const;
  long long integer(std::string_view key) const;
  long long integer_or(std::string_view key, long long fallback) const;
  std::string text(std::string_view key) const;
  std::string text_or(std::string_view key, std::string fallback) const;
  bool boolean_or(std::string_view key, bool fallback) const;

  /// Throws a DataError naming the first key not in `known`.
  void reject_unknown(const std::vector<std::string_view>& known) const;

  const std::string& path() const { return path_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::string path_;
  std::vector<Entry> entries_;
};

/// One data row of a CSV file with its 1-based line number.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Comma-separated text with leading `# key=value` comment lines and a
/// mandatory header row.
class CsvFile {
 public:
  static CsvFile read(const fs::path& path);

  /// Throws unless the header equals `expected` exactly.
  void expect_header(const std::vector<std::string_view>& expected) const;
  /// Index of `name` in the header, or -1.
  int column(std::string_view name) const;
  /// Value of a `# key=value` comment, or empty.
  std::string comment(std::string_view key) const;

  const std::string& path() const { return path_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<CsvRow>& rows() const { return rows_; }

 private:
  std::string path_;
  std::vector<std::pair<std::string, std::string>> comments_;
  std::vector<std::string> header_;
  std::vector<CsvRow> rows_;
};

/// Write `contents` to `path`, creating parent directories.
void write_text(const fs::path& path, const std::string& contents);
std::string read_text(const fs::path& path);

StereoCalibration read_calibration(const fs::path& path);
std::string format_calibration(const StereoCalibration& calib);

LegPressParams read_params(const fs::path& path);
std::string format_params(const LegPressParams& params);

/// Rows `t_sec,view,joint,x_px,y_px,conf`; only `joint` is kept. A frame whose
/// other view has no row is read as a missing detection in that view.
KeypointTrack read_keypoints(const fs::path& path, const std::string& joint = "hip");
std::string format_keypoints(const KeypointTrack& track);

Trajectory3D read_trajectory(const fs::path& path);
std::string format_trajectory(const Trajectory3D& traj);

DisplacementSeries read_displacement(const fs::path& path);
std::string format_displacement(const DisplacementSeries& series);

ForceSeries read_force(const fs::path& path);
std::string format_force(const ForceSeries& series);

EncoderStream read_encoder(const fs::path& path);
std::string format_encoder(const EncoderStream& encoder);

std::string format_reps(const RepCount& reps);

}  // namespace legscreen
