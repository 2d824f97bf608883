// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "legscreen/errors.hpp"
#include "legscreen/evaluation.hpp"
#include "legscreen/io.hpp"
#include "legscreen/legpress_dynamics.hpp"
#include "legscreen/manifest.hpp"
#include "legscreen/pipeline.hpp"
#include "legscreen/screening_metrics.hpp"
#include "legscreen/synth_oracle.hpp"
#include "../oracles.hpp"
#include "../test_support.hpp"

using namespace legscreen;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

oracle::LegPress to_oracle(const LegPressParams& p) {
  return {p.patient_mass_kg, p.sled_mass_kg, p.stack_mass_kg, p.pulley_inertia_kgm2, p.r1_m,
          p.r2_m,            p.alpha_rad,    p.beta_rad,      p.g};
}

// Noise-free closed loop at a 1 kHz camera so finite differences resolve the
// force to well below 1e-6 relative.
Outcome noise_free_loop() {
  const auto start = Clock::now();
  ScenarioConfig cfg;
  cfg.sinusoid = {0.2, 0.5, 5};
  cfg.noise.pixel_std_px = 0.0;
  cfg.noise.camera_jitter_fraction = 0.0;
  cfg.noise.force_noise_std_n = 0.0;
  cfg.rates.camera_hz = 1000.0;
  const PipelineConfig pipeline;

  const InvertCheckReport right = invert_check(cfg, pipeline);
  ScenarioConfig left_cfg = cfg;
  left_cfg.leg = Leg::left;
  left_cfg.seed = 2;
  const InvertCheckReport left = invert_check(left_cfg, pipeline);

  // Interior: inside the scoring window and clear of the stencil reach around
  // the onset and end of motion, where the commanded acceleration jumps.
  const MotionModel model(cfg);
  const auto& grid = right.estimate.force.timestamps;
  const double h = grid[1] - grid[0];
  const double reach = (pipeline.smoothing.window / 2 + 1) * h + 1e-9;
  double max_rel = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t < right.estimate.window.start || t > right.estimate.window.end) continue;
    if (std::abs(t - cfg.motion_start_s()) <= reach || std::abs(t - cfg.motion_end_s()) <= reach) continue;
    const double truth = model.force(t);
    max_rel = std::max(max_rel, std::abs(right.estimate.force.force[i] - truth) / std::abs(truth));
    ++used;
  }
  const double rmse = right.displacement_vs_truth.rmse;
  const double sym = percent_symmetry(right.estimate.reps.count, left.estimate.reps.count).percent;
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = rmse < 1e-6 && max_rel < 1e-6 && used > 1000 && right.estimate.reps.count == 5 &&
           left.estimate.reps.count == 5 && sym == 100.0 && elapsed < 5.0;
  o.detail = "disp RMSE " + num(rmse) + " m, force max rel err " + num(max_rel) + " over " + std::to_string(used) +
             " samples, reps " + std::to_string(right.estimate.reps.count) + "/" +
             std::to_string(left.estimate.reps.count) + ", symmetry " + format_real(sym) + ", " + num(elapsed) + " s";
  return o;
}

struct NoisyRun {
  double disp_nrmse = 0.0;
  double force_nrmse = 0.0;
  double disp_nrmse_unprojected = 0.0;
  double disp_truth_nrmse = 0.0;
  double disp_truth_nrmse_unprojected = 0.0;
};

// The 50 default-noise trials shared by the operating-point and projection checks.
std::vector<NoisyRun> noisy_trials(double& elapsed) {
  const auto start = Clock::now();
  std::vector<NoisyRun> runs;
  PipelineConfig unprojected;
  unprojected.noise_axis = NoiseAxis::none;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = 1000 + seed;
    const InvertCheckReport with = invert_check(cfg);
    const InvertCheckReport without = invert_check(cfg, unprojected);
    runs.push_back({with.sensors.displacement.nrmse_percent, with.sensors.force.nrmse_percent,
                    without.sensors.displacement.nrmse_percent, with.displacement_vs_truth.nrmse_percent,
                    without.displacement_vs_truth.nrmse_percent});
  }
  elapsed = seconds_since(start);
  return runs;
}

Outcome operating_point(const std::vector<NoisyRun>& runs, double elapsed) {
  double disp = 0, force = 0;
  for (const NoisyRun& r : runs) {
    disp += r.disp_nrmse;
    force += r.force_nrmse;
  }
  disp /= static_cast<double>(runs.size());
  force /= static_cast<double>(runs.size());
  // Elapsed covers both pipeline variants; the projected pass alone is about half.
  Outcome o;
  o.pass = disp < 10.0 && force < 15.0 && elapsed < 60.0;
  o.detail = "mean disp NRMSE " + num(disp) + " %, mean force NRMSE " + num(force) + " % vs encoder/plate over " +
             std::to_string(runs.size()) + " trials, " + num(elapsed) + " s";
  return o;
}

Outcome projection_helps(const std::vector<NoisyRun>& runs) {
  int better = 0, better_truth = 0;
  for (const NoisyRun& r : runs) {
    better += r.disp_nrmse < r.disp_nrmse_unprojected;
    better_truth += r.disp_truth_nrmse < r.disp_truth_nrmse_unprojected;
  }
  Outcome o;
  o.pass = better >= 45;
  o.detail = "projection lowers disp NRMSE in " + std::to_string(better) + "/50 trials vs encoder (" +
             std::to_string(better_truth) + "/50 vs true kinematics)";
  return o;
}

Outcome statics_identity() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int count = 0;
  while (count < 1000) {
    LegPressParams p;
    p.patient_mass_kg = 40 + 80 * u(rng);
    p.sled_mass_kg = 10 + 50 * u(rng);
    p.stack_mass_kg = 120 * u(rng);
    p.pulley_inertia_kgm2 = 0.2 * u(rng);
    p.r1_m = 0.02 + 0.25 * u(rng);
    p.r2_m = 0.02 + 0.25 * u(rng);
    p.alpha_rad = -1.0 + 2.0 * u(rng);
    p.beta_rad = -0.2 + 1.2 * u(rng);
    try {
      p.validate();
    } catch (const Error&) {
      continue;
    }
    ++count;
    const double level = 0.05 + 0.5 * u(rng);
    DisplacementSeries held;
    held.timestamps = uniform_grid(0.0, 0.125, 64);
    held.displacement.assign(64, level);
    const ForceSeries f = estimate_force(held, p, {});
    // Closed form of the static balance, and the two-step pulley/sled balance.
    const double closed = (p.r2_m / p.r1_m * p.stack_mass_kg * p.g +
                           (p.patient_mass_kg + p.sled_mass_kg) * p.g * std::sin(p.beta_rad)) /
                          std::cos(p.alpha_rad + p.beta_rad);
    const double two_step = oracle::plate_force(to_oracle(p), 0.0);
    for (double v : f.force) {
      worst = std::max(worst, std::abs(v - closed) / std::abs(closed));
      worst = std::max(worst, std::abs(v - two_step) / std::abs(two_step));
    }
  }
  Outcome o;
  o.pass = worst < 1e-9;
  o.detail = "1000 parameter sets, max relative deviation " + num(worst);
  return o;
}

Outcome force_inversion() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  const double h = 1.0 / kTruthRateHz;
  const double duration = 12.0;
  for (int trial = 0; trial < 20; ++trial) {
    ScenarioConfig cfg;
    cfg.motion = MotionKind::force_profile;
    cfg.params.patient_mass_kg = 55 + 40 * u(rng);
    cfg.params.stack_mass_kg = 20 + 40 * u(rng);
    // Static load plus three components at or below 2 Hz.
    const double base = force_from_acceleration(0.0, cfg.params);
    struct Wave {
      double amp, freq, phase;
    };
    std::vector<Wave> waves;
    for (int k = 0; k < 3; ++k)
      waves.push_back({40 + 60 * u(rng), 0.2 + 1.8 * u(rng), 2 * std::numbers::pi * u(rng)});
    const std::size_t n = static_cast<std::size_t>(std::llround(duration / h)) + 1;
    cfg.force_profile.timestamps = uniform_grid(0.0, h, n);
    for (double t : cfg.force_profile.timestamps) {
      double f = base;
      for (const Wave& w : waves) f += w.amp * std::sin(2 * std::numbers::pi * w.freq * t + w.phase);
      cfg.force_profile.force.push_back(f);
    }
    const MotionModel model(cfg);
    DisplacementSeries x;
    x.source = SeriesSource::truth;
    x.timestamps = cfg.force_profile.timestamps;
    for (double t : x.timestamps) x.displacement.push_back(model.displacement(t));
    const ForceSeries est = estimate_force(x, cfg.params, {});
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double t = est.timestamps[i];
      if (t < 1.0 || t > duration - 1.0) continue;
      const double truth = cfg.force_profile.force[i];
      worst = std::max(worst, std::abs(est.force[i] - truth) / std::abs(truth));
    }
  }
  Outcome o;
  o.pass = worst < 1e-4;
  o.detail = "20 profiles, max interior relative error " + num(worst);
  return o;
}

Outcome rep_exactness() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> cycles(8, 20);
  int exact = 0;
  std::string misses;
  for (int trial = 0; trial < 50; ++trial) {
    ScenarioConfig cfg;
    cfg.sinusoid.cycles = cycles(rng);
    cfg.seed = 5000 + static_cast<std::uint64_t>(trial);
    const InvertCheckReport r = invert_check(cfg);
    if (r.estimate.reps.count == cfg.sinusoid.cycles) {
      ++exact;
    } else {
      misses += " " + std::to_string(r.estimate.reps.count) + "/" + std::to_string(cfg.sinusoid.cycles);
    }
  }
  // Correct rounding of 100*lo/hi, checked through the exact residual.
  int symmetry_exact = 0;
  for (int a = 1; a <= 50; ++a)
    for (int b = 1; b <= 50; ++b) {
      const double v = percent_symmetry(a, b).percent;
      const double lo = std::min(a, b), hi = std::max(a, b);
      const double residual = std::abs(std::fma(v, hi, -100.0 * lo));
      const double half_ulp = (std::nextafter(v, 1e300) - v) / 2;
      symmetry_exact += residual <= hi * half_ulp && v == percent_symmetry(b, a).percent;
    }
  Outcome o;
  o.pass = exact >= 48 && symmetry_exact == 2500;
  o.detail = "exact reps in " + std::to_string(exact) + "/50 trials" + (misses.empty() ? "" : " (misses:" + misses + ")") +
             ", symmetry exact on " + std::to_string(symmetry_exact) + "/2500 pairs";
  return o;
}

Outcome trend_recovery() {
  const auto start = Clock::now();
  testing_support::TempDir dir("acceptance_cohort");
  CohortConfig cohort;
  cohort.subjects = 12;
  cohort.weeks = 12;
  cohort.peak_force_gain = 0.095;
  cohort.seed = 7;
  write_cohort(cohort, dir.path());
  const Manifest m = load_manifest(dir / "manifest.csv");
  const Evaluation ev = evaluate_manifest(m);
  const ProgressSeries all = cohort_progress(subject_progress(ev.rows, m));
  const double pct = all.peak_force_trend.percent_increase;
  const double r2 = all.peak_force_trend.r_squared;
  Outcome o;
  o.pass = std::abs(pct - 9.5) <= 1.5 && r2 > 0.8 && ev.failed.empty();
  o.detail = "recovered peak-force increase " + num(pct) + " % (injected 9.5 %), r2 " + num(r2) + ", " +
             std::to_string(ev.rows.size()) + " trials, " + num(seconds_since(start)) + " s";
  if (all.peak_force_meas_trend)
    o.detail += ", force-plate increase " + num(all.peak_force_meas_trend->percent_increase) + " %";
  return o;
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (!fs::is_regular_file(b / rel) || read_text(e.path()) != read_text(b / rel)) return false;
    ++files;
  }
  return files > 0;
}

Outcome determinism() {
  testing_support::TempDir dir("acceptance_det");
  std::ostringstream sink;
  const auto cli = [&](std::vector<std::string> args) { return run_cli(args, sink, sink); };
  const std::string a = (dir / "a").string(), b = (dir / "b").string();
  bool ok = cli({"simulate", "--out", a, "--seed", "99"}) == kExitOk;
  ok = ok && cli({"simulate", "--out", b, "--seed", "99"}) == kExitOk;
  std::size_t files = 0;
  const bool identical = ok && same_tree(dir / "a", dir / "b", files);

  CohortConfig small;
  small.subjects = 1;
  small.weeks = 2;
  write_cohort(small, dir / "c1");
  write_cohort(small, dir / "c2");
  std::size_t cohort_files = 0;
  const bool cohort_identical = same_tree(dir / "c1", dir / "c2", cohort_files);

  const fs::path sim = dir / "a";
  const std::string traj = (dir / "traj.csv").string(), disp = (dir / "disp.csv").string(),
                    force = (dir / "force.csv").string(), reps = (dir / "reps.csv").string();
  ok = cli({"triangulate", "--keypoints", (sim / "keypoints.csv").string(), "--calibration",
            (sim / "calibration.txt").string(), "--out", traj}) == kExitOk;
  ok = ok && cli({"displacement", "--trajectory", traj, "--out", disp}) == kExitOk;
  ok = ok && cli({"force", "--displacement", disp, "--params", (sim / "params.txt").string(), "--out", force}) == kExitOk;
  ok = ok && cli({"reps", "--displacement", disp, "--out", reps}) == kExitOk;
  const CameraEstimate est = estimate_trial(read_keypoints(sim / "keypoints.csv"),
                                            read_calibration(sim / "calibration.txt"), read_params(sim / "params.txt"));
  const bool staged = ok && read_text(traj) == format_trajectory(est.trajectory) &&
                      read_text(disp) == format_displacement(est.raw_displacement) &&
                      read_text(force) == format_force(est.force) && read_text(reps) == format_reps(est.reps);
  Outcome o;
  o.pass = identical && cohort_identical && staged;
  o.detail = std::string("simulate twice: ") + (identical ? "identical" : "DIFFERENT") + " (" + std::to_string(files) +
             " files), cohort twice: " + (cohort_identical ? "identical" : "DIFFERENT") + " (" +
             std::to_string(cohort_files) + " files), staged CLI vs in-process: " + (staged ? "identical" : "DIFFERENT");
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](const char* id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  };

  report("AC1", "noise-free closed loop", noise_free_loop);
  double noisy_elapsed = 0.0;
  std::vector<NoisyRun> runs;
  try {
    runs = noisy_trials(noisy_elapsed);
  } catch (const std::exception& e) {
    std::cout << "noisy trials threw: " << e.what() << std::endl;
  }
  report("AC2", "noisy operating point", [&] {
    return runs.empty() ? Outcome{false, "no runs"} : operating_point(runs, noisy_elapsed);
  });
  report("AC3", "depth-noise projection", [&] { return runs.empty() ? Outcome{false, "no runs"} : projection_helps(runs); });
  report("AC4", "statics identity", statics_identity);
  report("AC5", "force inversion of RK4 trajectories", force_inversion);
  report("AC6", "repetition and symmetry exactness", rep_exactness);
  report("AC7", "cohort trend recovery", trend_recovery);
  report("AC8", "determinism and stage composability", determinism);
  return failures == 0 ? 0 : 1;
}
