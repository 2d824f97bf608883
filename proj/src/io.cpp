#include "legscreen/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "legscreen/errors.hpp"

namespace legscreen {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void require_increasing(const std::vector<double>& t, const CsvFile& csv) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1]))
      throw DataError(csv.path(), csv.rows()[i].line, "timestamps must be strictly increasing");
  }
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  std::string out(buf.data(), res.ptr);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

double parse_real(std::string_view text, const std::string& path, std::size_t line) {
  const std::string_view t = trim(text);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (t.empty() || res.ec != std::errc() || res.ptr != last)
    throw DataError(path, line, "malformed number '" + std::string(t) + "'");
  return value;
}

long long parse_integer(std::string_view text, const std::string& path, std::size_t line) {
  const std::string_view t = trim(text);
  long long value = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw DataError(path, line, "malformed integer '" + std::string(t) + "'");
  return value;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string(), 0, "cannot open file for writing");
  out << contents;
  if (!out) throw DataError(path.string(), 0, "write failed");
}

// --- key/value -------------------------------------------------------------

KeyValueFile KeyValueFile::read(const fs::path& path) {
  return parse(read_text(path), path.string());
}

KeyValueFile KeyValueFile::parse(std::string_view text, std::string path_label) {
  KeyValueFile kv;
  kv.path_ = std::move(path_label);
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError(kv.path_, i + 1, "expected 'key = value'");
    Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), i + 1};
    if (e.key.empty()) throw DataError(kv.path_, i + 1, "empty key");
    if (kv.find(e.key)) throw DataError(kv.path_, i + 1, "duplicate key '" + e.key + "'");
    kv.entries_.push_back(std::move(e));
  }
  return kv;
}

const KeyValueFile::Entry* KeyValueFile::find(std::string_view key) const {
  for (const Entry& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

bool KeyValueFile::has(std::string_view key) const { return find(key) != nullptr; }

double KeyValueFile::real(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) throw DataError(path_, 0, "missing key '" + std::string(key) + "'");
  return parse_real(e->value, path_, e->line);
}

double KeyValueFile::real_or(std::string_view key, double fallback) const {
  return has(key) ? real(key) : fallback;
}

long long KeyValueFile::integer(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) throw DataError(path_, 0, "missing key '" + std::string(key) + "'");
  return parse_integer(e->value, path_, e->line);
}

long long KeyValueFile::integer_or(std::string_view key, long long fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::string KeyValueFile::text(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) throw DataError(path_, 0, "missing key '" + std::string(key) + "'");
  return e->value;
}

std::string KeyValueFile::text_or(std::string_view key, std::string fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

bool KeyValueFile::boolean_or(std::string_view key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1") return true;
  if (e->value == "false" || e->value == "0") return false;
  throw DataError(path_, e->line, "expected true/false for '" + e->key + "'");
}

void KeyValueFile::reject_unknown(const std::vector<std::string_view>& known) const {
  for (const Entry& e : entries_) {
    if (std::find(known.begin(), known.end(), e.key) == known.end())
      throw DataError(path_, e.line, "unknown key '" + e.key + "'");
  }
}

// --- CSV -------------------------------------------------------------------

CsvFile CsvFile::read(const fs::path& path) {
  CsvFile csv;
  csv.path_ = path.string();
  const std::string text = read_text(path);
  const auto lines = split_lines(text);
  bool have_header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      if (const auto eq = body.find('='); eq != std::string_view::npos)
        csv.comments_.emplace_back(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
      continue;
    }
    auto fields = split_fields(line);
    if (!have_header) {
      csv.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != csv.header_.size()) {
      std::ostringstream msg;
      msg << "expected " << csv.header_.size() << " fields, found " << fields.size();
      throw DataError(csv.path_, i + 1, msg.str());
    }
    csv.rows_.push_back({i + 1, std::move(fields)});
  }
  if (!have_header) throw DataError(csv.path_, 0, "file is empty (header row required)");
  return csv;
}

void CsvFile::expect_header(const std::vector<std::string_view>& expected) const {
  bool ok = header_.size() == expected.size();
  for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = header_[i] == expected[i];
  if (!ok) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + std::string(expected[i]);
    throw DataError(path_, 0, "unexpected header; expected '" + want + "'");
  }
}

int CsvFile::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return static_cast<int>(i);
  return -1;
}

std::string CsvFile::comment(std::string_view key) const {
  for (const auto& [k, v] : comments_)
    if (k == key) return v;
  return {};
}

// --- calibration / params ----------------------------------------------------

StereoCalibration read_calibration(const fs::path& path) {
  const auto kv = KeyValueFile::read(path);
  kv.reject_unknown({"focal_px", "cx", "cy", "baseline_m", "width", "height"});
  StereoCalibration c;
  c.focal_length_px = kv.real("focal_px");
  c.cx = kv.real("cx");
  c.cy = kv.real("cy");
  c.baseline_m = kv.real("baseline_m");
  c.width = static_cast<int>(kv.integer("width"));
  c.height = static_cast<int>(kv.integer("height"));
  try {
    c.validate();
  } catch (const Error& e) {
    throw DataError(path.string(), 0, e.what());
  }
  return c;
}

std::string format_calibration(const StereoCalibration& c) {
  std::ostringstream out;
  out << "focal_px = " << format_real(c.focal_length_px) << "\n"
      << "cx = " << format_real(c.cx) << "\n"
      << "cy = " << format_real(c.cy) << "\n"
      << "baseline_m = " << format_real(c.baseline_m) << "\n"
      << "width = " << c.width << "\n"
      << "height = " << c.height << "\n";
  return out.str();
}

LegPressParams read_params(const fs::path& path) {
  const auto kv = KeyValueFile::read(path);
  kv.reject_unknown({"m_kg", "m_s_kg", "m_w_kg", "I_kgm2", "r1_m", "r2_m", "alpha_rad", "beta_rad", "g",
                     "calibrated"});
  LegPressParams p;
  p.patient_mass_kg = kv.real("m_kg");
  p.sled_mass_kg = kv.real("m_s_kg");
  p.stack_mass_kg = kv.real("m_w_kg");
  p.pulley_inertia_kgm2 = kv.real("I_kgm2");
  p.r1_m = kv.real("r1_m");
  p.r2_m = kv.real("r2_m");
  p.alpha_rad = kv.real("alpha_rad");
  p.beta_rad = kv.real("beta_rad");
  p.g = kv.real_or("g", 9.80665);
  p.calibrated = kv.boolean_or("calibrated", false);
  try {
    p.validate();
  } catch (const Error& e) {
    throw DataError(path.string(), 0, e.what());
  }
  return p;
}

std::string format_params(const LegPressParams& p) {
  std::ostringstream out;
  out << "m_kg = " << format_real(p.patient_mass_kg) << "\n"
      << "m_s_kg = " << format_real(p.sled_mass_kg) << "\n"
      << "m_w_kg = " << format_real(p.stack_mass_kg) << "\n"
      << "I_kgm2 = " << format_real(p.pulley_inertia_kgm2) << "\n"
      << "r1_m = " << format_real(p.r1_m) << "\n"
      << "r2_m = " << format_real(p.r2_m) << "\n"
      << "alpha_rad = " << format_real(p.alpha_rad) << "\n"
      << "beta_rad = " << format_real(p.beta_rad) << "\n"
      << "g = " << format_real(p.g) << "\n"
      << "calibrated = " << (p.calibrated ? "true" : "false") << "\n";
  return out.str();
}

// --- keypoints ---------------------------------------------------------------

KeypointTrack read_keypoints(const fs::path& path, const std::string& joint) {
  const CsvFile csv = CsvFile::read(path);
  csv.expect_header({"t_sec", "view", "joint", "x_px", "y_px", "conf"});

  struct Frame {
    std::optional<Keypoint2D> left;
    std::optional<Keypoint2D> right;
  };
  std::map<double, Frame> frames;
  for (const CsvRow& row : csv.rows()) {
    if (row.fields[2] != joint) continue;
    const double t = parse_real(row.fields[0], csv.path(), row.line);
    Keypoint2D kp{parse_real(row.fields[3], csv.path(), row.line), parse_real(row.fields[4], csv.path(), row.line),
                  parse_real(row.fields[5], csv.path(), row.line)};
    if (!(kp.confidence >= 0.0 && kp.confidence <= 1.0))
      throw DataError(csv.path(), row.line, "confidence must lie in [0, 1]");
    if (!std::isfinite(t)) throw DataError(csv.path(), row.line, "timestamp must be finite");
    Frame& f = frames[t];
    std::optional<Keypoint2D>* slot = nullptr;
    if (row.fields[1] == "L") slot = &f.left;
    else if (row.fields[1] == "R") slot = &f.right;
    else throw DataError(csv.path(), row.line, "view must be L or R");
    if (slot->has_value()) throw DataError(csv.path(), row.line, "duplicate row for this frame and view");
    *slot = kp;
  }
  if (frames.empty()) throw DataError(csv.path(), 0, "no rows for joint '" + joint + "'");

  KeypointTrack track;
  track.joint_name = joint;
  for (const auto& [t, f] : frames) {
    track.timestamps.push_back(t);
    track.left.push_back(f.left.value_or(Keypoint2D{}));
    track.right.push_back(f.right.value_or(Keypoint2D{}));
  }
  return track;
}

std::string format_keypoints(const KeypointTrack& track) {
  track.validate();
  std::string out = "t_sec,view,joint,x_px,y_px,conf\n";
  for (std::size_t i = 0; i < track.size(); ++i) {
    const std::string t = format_real(track.timestamps[i]);
    for (const auto& [view, kp] : {std::pair{"L", &track.left[i]}, std::pair{"R", &track.right[i]}}) {
      out += t + "," + view + "," + track.joint_name + "," + format_real(kp->x) + "," + format_real(kp->y) + "," +
             format_real(kp->confidence) + "\n";
    }
  }
  return out;
}

// --- series ------------------------------------------------------------------

Trajectory3D read_trajectory(const fs::path& path) {
  const CsvFile csv = CsvFile::read(path);
  csv.expect_header({"t_sec", "X_m", "Y_m", "Z_m"});
  Trajectory3D traj;
  for (const CsvRow& row : csv.rows()) {
    traj.timestamps.push_back(parse_real(row.fields[0], csv.path(), row.line));
    traj.points.emplace_back(parse_real(row.fields[1], csv.path(), row.line),
                             parse_real(row.fields[2], csv.path(), row.line),
                             parse_real(row.fields[3], csv.path(), row.line));
  }
  require_increasing(traj.timestamps, csv);
  return traj;
}

std::string format_trajectory(const Trajectory3D& traj) {
  std::string out = "t_sec,X_m,Y_m,Z_m\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vec3& p = traj.points[i];
    out += format_real(traj.timestamps[i]) + "," + format_real(p.x()) + "," + format_real(p.y()) + "," +
           format_real(p.z()) + "\n";
  }
  return out;
}

namespace {

SeriesSource source_comment(const CsvFile& csv, SeriesSource fallback) {
  const std::string s = csv.comment("source");
  if (s.empty()) return fallback;
  try {
    return parse_series_source(s);
  } catch (const Error& e) {
    throw DataError(csv.path(), 0, e.what());
  }
}

std::pair<std::vector<double>, std::vector<double>> read_two_columns(const CsvFile& csv) {
  std::vector<double> t;
  std::vector<double> v;
  t.reserve(csv.rows().size());
  v.reserve(csv.rows().size());
  for (const CsvRow& row : csv.rows()) {
    t.push_back(parse_real(row.fields[0], csv.path(), row.line));
    v.push_back(parse_real(row.fields[1], csv.path(), row.line));
  }
  require_increasing(t, csv);
  return {std::move(t), std::move(v)};
}

std::string format_two_columns(SeriesSource source, std::string_view header, const std::vector<double>& t,
                               const std::vector<double>& v) {
  std::string out = "# source=" + std::string(to_string(source)) + "\n" + std::string(header) + "\n";
  for (std::size_t i = 0; i < t.size(); ++i) out += format_real(t[i]) + "," + format_real(v[i]) + "\n";
  return out;
}

}  // namespace

DisplacementSeries read_displacement(const fs::path& path) {
  const CsvFile csv = CsvFile::read(path);
  csv.expect_header({"t_sec", "disp_m"});
  DisplacementSeries s;
  s.source = source_comment(csv, SeriesSource::camera);
  std::tie(s.timestamps, s.displacement) = read_two_columns(csv);
  return s;
}

std::string format_displacement(const DisplacementSeries& s) {
  return format_two_columns(s.source, "t_sec,disp_m", s.timestamps, s.displacement);
}

ForceSeries read_force(const fs::path& path) {
  const CsvFile csv = CsvFile::read(path);
  csv.expect_header({"t_sec", "force_N"});
  ForceSeries s;
  s.source = source_comment(csv, SeriesSource::force_plate);
  std::tie(s.timestamps, s.force) = read_two_columns(csv);
  return s;
}

std::string format_force(const ForceSeries& s) {
  return format_two_columns(s.source, "t_sec,force_N", s.timestamps, s.force);
}

EncoderStream read_encoder(const fs::path& path) {
  const CsvFile csv = CsvFile::read(path);
  csv.expect_header({"t_sec", "counts"});
  EncoderStream enc;
  if (const std::string cpr = csv.comment("counts_per_rev"); !cpr.empty())
    enc.counts_per_rev = static_cast<int>(parse_integer(cpr, csv.path(), 0));
  if (enc.counts_per_rev <= 0) throw DataError(csv.path(), 0, "counts_per_rev must be > 0");
  for (const CsvRow& row : csv.rows()) {
    enc.timestamps.push_back(parse_real(row.fields[0], csv.path(), row.line));
    enc.counts.push_back(parse_integer(row.fields[1], csv.path(), row.line));
  }
  require_increasing(enc.timestamps, csv);
  return enc;
}

std::string format_encoder(const EncoderStream& enc) {
  std::string out = "# counts_per_rev=" + std::to_string(enc.counts_per_rev) + "\nt_sec,counts\n";
  for (std::size_t i = 0; i < enc.size(); ++i)
    out += format_real(enc.timestamps[i]) + "," + std::to_string(enc.counts[i]) + "\n";
  return out;
}

std::string format_reps(const RepCount& reps) {
  std::string out = "# count=" + std::to_string(reps.count) + "\ncrossing_t_sec\n";
  for (double t : reps.crossing_times) out += format_real(t) + "\n";
  return out;
}

}  // namespace legscreen
