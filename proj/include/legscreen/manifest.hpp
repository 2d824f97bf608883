#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace legscreen {

enum class Leg { left, right };

std::string_view to_string(Leg leg);
/// Accepts `left`/`right` and `L`/`R`.
Leg parse_leg(std::string_view text);

/// Loads allowed by the test protocol, as fractions of body weight.
inline constexpr double kProtocolLoads[] = {0.30, 0.50};
inline constexpr int kMaxSessionWeek = 12;

/// One 35 s leg-press test. Paths are absolute after loading; the sensor
/// paths and `params_path` may be empty.
struct TrialRecord {
  std::string trial_id;
  std::string subject_id;
  int session_week = 1;
  Leg leg = Leg::right;
  double load_fraction = 0.5;
  std::filesystem::path keypoint_path;
  std::filesystem::path encoder_path;
  std::filesystem::path force_path;
  /// Per-trial machine/patient constants; falls back to the manifest's.
  std::filesystem::path params_path;

  bool has_sensors() const { return !encoder_path.empty() && !force_path.empty(); }
};

struct ManifestSkip {
  std::size_t line = 0;
  std::string trial_id;
  std::string reason;
};

struct Manifest {
  std::filesystem::path calibration_path;
  std::filesystem::path params_path;
  std::vector<TrialRecord> trials;
  /// Rows that failed validation; they never reach evaluation.
  std::vector<ManifestSkip> skipped;

  const std::filesystem::path& params_for(const TrialRecord& trial) const {
    return trial.params_path.empty() ? params_path : trial.params_path;
  }
};

/// CSV with header
/// `trial_id,subject_id,session_week,leg,load_fraction,keypoint_path,encoder_path,force_path[,params_path]`
/// and `# calibration=` / `# params=` comment lines. Relative paths resolve
/// against the manifest's directory. Empty files and duplicate trial ids are
/// data errors; rows breaking the protocol or naming missing files are skipped.
Manifest load_manifest(const std::filesystem::path& path);

/// Paths are written relative to `base_dir` when they lie below it.
std::string format_manifest(const Manifest& manifest, const std::filesystem::path& base_dir);

}  // namespace legscreen
