#include "legscreen/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "legscreen/errors.hpp"
#include "legscreen/io.hpp"

namespace legscreen {

namespace {

const std::vector<std::string_view> kReportColumns{
    "trial_id",      "leg",          "load_frac",       "reps_est",     "reps_meas",
    "sym_est",       "sym_meas",     "disp_rmse_m",     "disp_nrmse_pct", "force_rmse_N",
    "force_nrmse_pct", "peak_force_N", "peak_force_meas_N"};

template <typename T>
std::string optional_text(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_integral_v<T>) {
    return std::to_string(*v);
  } else {
    return format_real(*v);
  }
}

std::optional<double> optional_real(const std::string& s, const std::string& path, std::size_t line) {
  if (s.empty()) return std::nullopt;
  return parse_real(s, path, line);
}

std::optional<int> optional_int(const std::string& s, const std::string& path, std::size_t line) {
  if (s.empty()) return std::nullopt;
  return static_cast<int>(parse_integer(s, path, line));
}

bool same_load(double a, double b) { return std::abs(a - b) <= 1e-9; }

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

ReportRow evaluate_trial(const TrialRecord& trial, const StereoCalibration& calib, const LegPressParams& params,
                         const PipelineConfig& cfg) {
  ReportRow row;
  row.trial_id = trial.trial_id;
  row.leg = trial.leg;
  row.load_fraction = trial.load_fraction;
  const CameraEstimate est = estimate_trial(read_keypoints(trial.keypoint_path), calib, params, cfg);
  row.reps_est = est.reps.count;
  row.peak_force_n = est.peak_force;
  if (trial.has_sensors()) {
    const DisplacementSeries encoder = encoder_displacement(read_encoder(trial.encoder_path), params.r1_m);
    const SensorComparison cmp = compare_with_sensors(est, encoder, read_force(trial.force_path), cfg);
    row.reps_meas = cmp.reps_measured;
    row.disp_rmse_m = cmp.displacement.rmse;
    row.disp_nrmse_pct = cmp.displacement.nrmse_percent;
    row.force_rmse_n = cmp.force.rmse;
    row.force_nrmse_pct = cmp.force.nrmse_percent;
    row.peak_force_meas_n = cmp.peak_force_measured;
  }
  return row;
}

Evaluation evaluate_manifest(const Manifest& manifest, const PipelineConfig& cfg, unsigned threads) {
  if (manifest.calibration_path.empty()) throw DataError("manifest", 0, "no '# calibration=' line");
  const StereoCalibration calib = read_calibration(manifest.calibration_path);

  Evaluation ev;
  ev.skipped = manifest.skipped;
  const std::size_t n = manifest.trials.size();
  std::vector<std::optional<ReportRow>> results(n);
  std::vector<std::string> errors(n);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const TrialRecord& t = manifest.trials[i];
      try {
        results[i] = evaluate_trial(t, calib, read_params(manifest.params_for(t)), cfg);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) {
      ev.rows.push_back(std::move(*results[i]));
    } else {
      ev.failed.push_back({manifest.trials[i].trial_id, errors[i]});
    }
  }
  std::sort(ev.rows.begin(), ev.rows.end(), [](const auto& a, const auto& b) { return a.trial_id < b.trial_id; });
  std::sort(ev.failed.begin(), ev.failed.end(), [](const auto& a, const auto& b) { return a.trial_id < b.trial_id; });
  pair_symmetry(ev.rows, manifest);
  return ev;
}

void pair_symmetry(std::vector<ReportRow>& rows, const Manifest& manifest) {
  std::map<std::string, const TrialRecord*> by_id;
  for (const TrialRecord& t : manifest.trials) by_id[t.trial_id] = &t;

  // (subject, week, load in percent) -> row index per leg
  std::map<std::tuple<std::string, int, long>, std::pair<int, int>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto it = by_id.find(rows[i].trial_id);
    if (it == by_id.end()) continue;
    const TrialRecord& t = *it->second;
    auto& slot = groups.try_emplace({t.subject_id, t.session_week, std::lround(t.load_fraction * 1000)}, -1, -1)
                     .first->second;
    (t.leg == Leg::right ? slot.first : slot.second) = static_cast<int>(i);
  }
  for (const auto& [key, pair] : groups) {
    const auto [ri, li] = pair;
    if (ri < 0 || li < 0) continue;
    ReportRow& r = rows[static_cast<std::size_t>(ri)];
    ReportRow& l = rows[static_cast<std::size_t>(li)];
    if (r.reps_est > 0 || l.reps_est > 0) r.sym_est = l.sym_est = percent_symmetry(r.reps_est, l.reps_est).percent;
    if (r.reps_meas && l.reps_meas && (*r.reps_meas > 0 || *l.reps_meas > 0))
      r.sym_meas = l.sym_meas = percent_symmetry(*r.reps_meas, *l.reps_meas).percent;
  }
}

std::string format_report(const std::vector<ReportRow>& rows) {
  std::ostringstream o;
  for (std::size_t i = 0; i < kReportColumns.size(); ++i) o << (i ? "," : "") << kReportColumns[i];
  o << '\n';
  for (const ReportRow& r : rows) {
    o << r.trial_id << ',' << to_string(r.leg) << ',' << format_real(r.load_fraction) << ',' << r.reps_est << ','
      << optional_text(r.reps_meas) << ',' << optional_text(r.sym_est) << ',' << optional_text(r.sym_meas) << ','
      << optional_text(r.disp_rmse_m) << ',' << optional_text(r.disp_nrmse_pct) << ','
      << optional_text(r.force_rmse_n) << ',' << optional_text(r.force_nrmse_pct) << ','
      << format_real(r.peak_force_n) << ',' << optional_text(r.peak_force_meas_n) << '\n';
  }
  return o.str();
}

std::vector<ReportRow> read_report(const fs::path& path) {
  const CsvFile csv = CsvFile::read(path);
  csv.expect_header(kReportColumns);
  const std::string& p = csv.path();
  std::vector<ReportRow> rows;
  for (const CsvRow& row : csv.rows()) {
    const auto& f = row.fields;
    ReportRow r;
    r.trial_id = f[0];
    try {
      r.leg = parse_leg(f[1]);
    } catch (const Error& e) {
      throw DataError(p, row.line, e.what());
    }
    r.load_fraction = parse_real(f[2], p, row.line);
    r.reps_est = static_cast<int>(parse_integer(f[3], p, row.line));
    r.reps_meas = optional_int(f[4], p, row.line);
    r.sym_est = optional_real(f[5], p, row.line);
    r.sym_meas = optional_real(f[6], p, row.line);
    r.disp_rmse_m = optional_real(f[7], p, row.line);
    r.disp_nrmse_pct = optional_real(f[8], p, row.line);
    r.force_rmse_n = optional_real(f[9], p, row.line);
    r.force_nrmse_pct = optional_real(f[10], p, row.line);
    r.peak_force_n = parse_real(f[11], p, row.line);
    r.peak_force_meas_n = optional_real(f[12], p, row.line);
    rows.push_back(std::move(r));
  }
  return rows;
}

SummaryTable summarize(const std::vector<ReportRow>& rows) {
  SummaryTable s;
  std::vector<double> d_rmse, d_nrmse, f_rmse, f_nrmse, reps_acc, sym_acc;
  for (const ReportRow& r : rows) {
    if (r.disp_rmse_m) {
      d_rmse.push_back(*r.disp_rmse_m);
      d_nrmse.push_back(*r.disp_nrmse_pct);
      f_rmse.push_back(*r.force_rmse_n);
      f_nrmse.push_back(*r.force_nrmse_pct);
    }
    if (r.reps_meas) {
      if (auto a = relative_agreement(r.reps_est, *r.reps_meas)) {
        reps_acc.push_back(*a);
      } else {
        ++s.reps_excluded;
      }
    }
    // One symmetry value per leg pair: count it on the right-leg row.
    if (r.leg == Leg::right && r.sym_est && r.sym_meas) {
      if (auto a = relative_agreement(*r.sym_est, *r.sym_meas)) {
        sym_acc.push_back(*a);
      } else {
        ++s.symmetry_excluded;
      }
    }
  }
  s.trials = d_rmse.size();
  std::tie(s.disp_rmse_mean_m, s.disp_rmse_std_m) = mean_std(d_rmse);
  std::tie(s.disp_nrmse_mean_pct, s.disp_nrmse_std_pct) = mean_std(d_nrmse);
  std::tie(s.force_rmse_mean_n, s.force_rmse_std_n) = mean_std(f_rmse);
  std::tie(s.force_nrmse_mean_pct, s.force_nrmse_std_pct) = mean_std(f_nrmse);
  s.distance_accuracy_pct = d_nrmse.empty() ? 0.0 : 100.0 - s.disp_nrmse_mean_pct;
  s.force_accuracy_pct = f_nrmse.empty() ? 0.0 : 100.0 - s.force_nrmse_mean_pct;
  s.reps_accuracy_pct = mean_std(reps_acc).first;
  s.symmetry_accuracy_pct = mean_std(sym_acc).first;
  return s;
}

std::string format_summary(const SummaryTable& s) {
  std::ostringstream o;
  o << "metric,value\n";
  const auto real = [&](std::string_view k, double v) { o << k << ',' << format_real(v) << '\n'; };
  o << "trials," << s.trials << '\n';
  real("distance_accuracy_pct", s.distance_accuracy_pct);
  real("force_accuracy_pct", s.force_accuracy_pct);
  real("reps_accuracy_pct", s.reps_accuracy_pct);
  real("symmetry_accuracy_pct", s.symmetry_accuracy_pct);
  real("disp_rmse_mean_m", s.disp_rmse_mean_m);
  real("disp_rmse_std_m", s.disp_rmse_std_m);
  real("disp_nrmse_mean_pct", s.disp_nrmse_mean_pct);
  real("disp_nrmse_std_pct", s.disp_nrmse_std_pct);
  real("force_rmse_mean_N", s.force_rmse_mean_n);
  real("force_rmse_std_N", s.force_rmse_std_n);
  real("force_nrmse_mean_pct", s.force_nrmse_mean_pct);
  real("force_nrmse_std_pct", s.force_nrmse_std_pct);
  o << "reps_excluded_zero_measured," << s.reps_excluded << '\n';
  o << "symmetry_excluded_zero_measured," << s.symmetry_excluded << '\n';
  return o.str();
}

// --- progress ------------------------------------------------------------------

namespace {

std::vector<double> normalize(const std::vector<double>& v) {
  const double peak = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.0);
  if (peak > 0.0)
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / peak;
  return out;
}

std::vector<std::optional<double>> normalize(const std::vector<std::optional<double>>& v) {
  double peak = 0.0;
  for (const auto& x : v)
    if (x) peak = std::max(peak, *x);
  std::vector<std::optional<double>> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) out[i] = peak > 0.0 ? *v[i] / peak : 0.0;
  return out;
}

std::optional<ProgressTrend> trend_if_complete(const std::vector<int>& weeks,
                                               const std::vector<std::optional<double>>& v) {
  std::vector<double> values;
  for (const auto& x : v) {
    if (!x) return std::nullopt;
    values.push_back(*x);
  }
  return fit_trend(weeks, values);
}

void fit_series(ProgressSeries& s) {
  s.reps_trend = fit_trend(s.weeks, s.norm_reps_est);
  s.peak_force_trend = fit_trend(s.weeks, s.norm_peak_force_est);
  s.reps_meas_trend = trend_if_complete(s.weeks, s.norm_reps_meas);
  s.peak_force_meas_trend = trend_if_complete(s.weeks, s.norm_peak_force_meas);
}

struct WeekSums {
  int n = 0;
  double reps_est = 0, peak_est = 0, reps_meas = 0, peak_meas = 0;
  int n_reps_meas = 0, n_peak_meas = 0;
};

}  // namespace

std::vector<ProgressSeries> subject_progress(const std::vector<ReportRow>& rows, const Manifest& manifest,
                                             ProgressSelection sel) {
  std::map<std::string, const TrialRecord*> by_id;
  for (const TrialRecord& t : manifest.trials) by_id[t.trial_id] = &t;

  std::map<std::string, std::map<int, WeekSums>> per_subject;
  for (const ReportRow& r : rows) {
    const auto it = by_id.find(r.trial_id);
    if (it == by_id.end()) continue;
    const TrialRecord& t = *it->second;
    if (t.leg != sel.leg || !same_load(t.load_fraction, sel.load_fraction)) continue;
    WeekSums& w = per_subject[t.subject_id][t.session_week];
    ++w.n;
    w.reps_est += r.reps_est;
    w.peak_est += r.peak_force_n;
    if (r.reps_meas) {
      w.reps_meas += *r.reps_meas;
      ++w.n_reps_meas;
    }
    if (r.peak_force_meas_n) {
      w.peak_meas += *r.peak_force_meas_n;
      ++w.n_peak_meas;
    }
  }

  std::vector<ProgressSeries> out;
  for (const auto& [subject, weeks] : per_subject) {
    if (weeks.size() < 2) continue;
    ProgressSeries s;
    s.subject_id = subject;
    std::vector<double> reps_est, peak_est;
    std::vector<std::optional<double>> reps_meas, peak_meas;
    for (const auto& [week, w] : weeks) {
      s.weeks.push_back(week);
      reps_est.push_back(w.reps_est / w.n);
      peak_est.push_back(w.peak_est / w.n);
      reps_meas.push_back(w.n_reps_meas == w.n ? std::optional(w.reps_meas / w.n) : std::nullopt);
      peak_meas.push_back(w.n_peak_meas == w.n ? std::optional(w.peak_meas / w.n) : std::nullopt);
    }
    s.norm_reps_est = normalize(reps_est);
    s.norm_peak_force_est = normalize(peak_est);
    s.norm_reps_meas = normalize(reps_meas);
    s.norm_peak_force_meas = normalize(peak_meas);
    fit_series(s);
    out.push_back(std::move(s));
  }
  return out;
}

ProgressSeries cohort_progress(const std::vector<ProgressSeries>& subjects) {
  if (subjects.empty()) fail(ErrorKind::insufficient_data, "no subject has trials in two or more weeks");
  struct Acc {
    double reps = 0, peak = 0, reps_meas = 0, peak_meas = 0;
    int n = 0, n_reps_meas = 0, n_peak_meas = 0;
  };
  std::map<int, Acc> weeks;
  for (const ProgressSeries& s : subjects) {
    for (std::size_t i = 0; i < s.weeks.size(); ++i) {
      Acc& a = weeks[s.weeks[i]];
      ++a.n;
      a.reps += s.norm_reps_est[i];
      a.peak += s.norm_peak_force_est[i];
      if (s.norm_reps_meas[i]) {
        a.reps_meas += *s.norm_reps_meas[i];
        ++a.n_reps_meas;
      }
      if (s.norm_peak_force_meas[i]) {
        a.peak_meas += *s.norm_peak_force_meas[i];
        ++a.n_peak_meas;
      }
    }
  }
  ProgressSeries c;
  c.subject_id = "cohort";
  for (const auto& [week, a] : weeks) {
    c.weeks.push_back(week);
    c.norm_reps_est.push_back(a.reps / a.n);
    c.norm_peak_force_est.push_back(a.peak / a.n);
    c.norm_reps_meas.push_back(a.n_reps_meas == a.n ? std::optional(a.reps_meas / a.n) : std::nullopt);
    c.norm_peak_force_meas.push_back(a.n_peak_meas == a.n ? std::optional(a.peak_meas / a.n) : std::nullopt);
  }
  fit_series(c);
  return c;
}

std::string format_progress(const ProgressSeries& s) {
  std::ostringstream o;
  o << "week,norm_reps_est,norm_reps_meas,norm_peak_force_est,norm_peak_force_meas\n";
  for (std::size_t i = 0; i < s.weeks.size(); ++i) {
    o << s.weeks[i] << ',' << format_real(s.norm_reps_est[i]) << ',' << optional_text(s.norm_reps_meas[i]) << ','
      << format_real(s.norm_peak_force_est[i]) << ',' << optional_text(s.norm_peak_force_meas[i]) << '\n';
  }
  const auto footer = [&](std::string_view name, const std::optional<ProgressTrend>& t) {
    if (!t) return;
    o << "# " << name << "_slope=" << format_real(t->slope) << '\n';
    o << "# " << name << "_r2=" << format_real(t->r_squared) << '\n';
    o << "# " << name << "_percent_increase=" << format_real(t->percent_increase) << '\n';
  };
  footer("reps_est", s.reps_trend);
  footer("reps_meas", s.reps_meas_trend);
  footer("peak_force_est", s.peak_force_trend);
  footer("peak_force_meas", s.peak_force_meas_trend);
  return o.str();
}

}  // namespace legscreen
