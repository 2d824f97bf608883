#include "legscreen/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "legscreen/errors.hpp"
#include "legscreen/io.hpp"

namespace legscreen {

std::string_view to_string(Leg leg) { return leg == Leg::left ? "left" : "right"; }

Leg parse_leg(std::string_view text) {
  if (text == "left" || text == "L") return Leg::left;
  if (text == "right" || text == "R") return Leg::right;
  fail(ErrorKind::invalid_argument, "unknown leg '" + std::string(text) + "' (expected left or right)");
}

namespace {

const std::vector<std::string_view> kColumns{"trial_id",     "subject_id",   "session_week", "leg",
                                             "load_fraction", "keypoint_path", "encoder_path", "force_path"};

fs::path resolve(const fs::path& base, const std::string& text) {
  if (text.empty()) return {};
  const fs::path p(text);
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

bool protocol_load(double load) {
  return std::any_of(std::begin(kProtocolLoads), std::end(kProtocolLoads),
                     [&](double l) { return std::abs(load - l) <= 1e-9; });
}

std::string relative_text(const fs::path& p, const fs::path& base) {
  if (p.empty()) return {};
  const fs::path rel = p.lexically_relative(base);
  if (rel.empty() || *rel.begin() == "..") return p.generic_string();
  return rel.generic_string();
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  const CsvFile csv = CsvFile::read(path);
  const std::string label = path.string();
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

  const auto& header = csv.header();
  const bool has_params = header.size() == kColumns.size() + 1;
  std::vector<std::string_view> expected = kColumns;
  if (has_params) expected.push_back("params_path");
  csv.expect_header(expected);
  if (csv.rows().empty()) throw DataError(label, 0, "manifest lists no trials");

  Manifest m;
  m.calibration_path = resolve(base, csv.comment("calibration"));
  m.params_path = resolve(base, csv.comment("params"));

  std::set<std::string> seen;
  for (const CsvRow& row : csv.rows()) {
    const auto& f = row.fields;
    TrialRecord t;
    t.trial_id = f[0];
    if (t.trial_id.empty()) throw DataError(label, row.line, "empty trial_id");
    if (!seen.insert(t.trial_id).second)
      throw DataError(label, row.line, "duplicate trial_id '" + t.trial_id + "'");

    auto skip = [&](std::string reason) { m.skipped.push_back({row.line, t.trial_id, std::move(reason)}); };
    t.subject_id = f[1];
    if (t.subject_id.empty()) {
      skip("empty subject_id");
      continue;
    }
    try {
      t.session_week = static_cast<int>(parse_integer(f[2], label, row.line));
      t.leg = parse_leg(f[3]);
      t.load_fraction = parse_real(f[4], label, row.line);
    } catch (const Error& e) {
      skip(e.what());
      continue;
    }
    if (t.session_week < 1 || t.session_week > kMaxSessionWeek) {
      skip("session_week " + f[2] + " outside 1.." + std::to_string(kMaxSessionWeek));
      continue;
    }
    if (!protocol_load(t.load_fraction)) {
      skip("load_fraction " + f[4] + " is not a protocol load (0.30 or 0.50)");
      continue;
    }
    t.keypoint_path = resolve(base, f[5]);
    t.encoder_path = resolve(base, f[6]);
    t.force_path = resolve(base, f[7]);
    if (has_params) t.params_path = resolve(base, f[8]);

    if (t.keypoint_path.empty()) {
      skip("no keypoint file");
      continue;
    }
    std::string missing;
    for (const fs::path* p : {&t.keypoint_path, &t.encoder_path, &t.force_path, &t.params_path}) {
      if (!p->empty() && !fs::is_regular_file(*p)) {
        missing = p->string();
        break;
      }
    }
    if (!missing.empty()) {
      skip("missing file " + missing);
      continue;
    }
    if (t.params_path.empty() && m.params_path.empty()) {
      skip("no params file (row or '# params=' comment)");
      continue;
    }
    m.trials.push_back(std::move(t));
  }
  return m;
}

std::string format_manifest(const Manifest& m, const fs::path& base_dir) {
  const bool with_params = std::any_of(m.trials.begin(), m.trials.end(),
                                       [](const TrialRecord& t) { return !t.params_path.empty(); });
  std::ostringstream out;
  if (!m.calibration_path.empty()) out << "# calibration=" << relative_text(m.calibration_path, base_dir) << '\n';
  if (!m.params_path.empty()) out << "# params=" << relative_text(m.params_path, base_dir) << '\n';
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
  if (with_params) out << ",params_path";
  out << '\n';
  for (const TrialRecord& t : m.trials) {
    out << t.trial_id << ',' << t.subject_id << ',' << t.session_week << ',' << to_string(t.leg) << ','
        << format_real(t.load_fraction) << ',' << relative_text(t.keypoint_path, base_dir) << ','
        << relative_text(t.encoder_path, base_dir) << ',' << relative_text(t.force_path, base_dir);
    if (with_params) out << ',' << relative_text(t.params_path, base_dir);
    out << '\n';
  }
  return out.str();
}

}  // namespace legscreen
