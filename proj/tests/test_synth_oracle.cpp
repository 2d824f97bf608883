#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "legscreen/errors.hpp"
#include "legscreen/io.hpp"
#include "legscreen/synth_oracle.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace legscreen;
using testing_support::TempDir;

namespace {

ScenarioConfig five_cycles() {
  ScenarioConfig cfg;
  cfg.sinusoid.cycles = 5;
  return cfg;
}

ScenarioConfig noise_free(ScenarioConfig cfg) {
  cfg.noise.pixel_std_px = 0.0;
  cfg.noise.camera_jitter_fraction = 0.0;
  cfg.noise.force_noise_std_n = 0.0;
  return cfg;
}

oracle::LegPress to_oracle(const LegPressParams& p) {
  return {p.patient_mass_kg, p.sled_mass_kg, p.stack_mass_kg, p.pulley_inertia_kgm2, p.r1_m,
          p.r2_m,            p.alpha_rad,    p.beta_rad,      p.g};
}

bool within(std::size_t n, double expected) { return std::abs(static_cast<double>(n) - expected) <= 1.0; }

}  // namespace

TEST_CASE("same seed gives byte-identical files") {
  const ScenarioConfig cfg = five_cycles();
  TempDir a("sim_a"), b("sim_b"), c("sim_c");
  write_simulation(simulate(cfg), cfg, a.path());
  write_simulation(simulate(cfg), cfg, b.path());
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(a.path())) names.insert(e.path().filename().string());
  CHECK(names.count("keypoints.csv") == 1);
  CHECK(names.count("truth_force.csv") == 1);
  for (const std::string& name : names) {
    INFO(name);
    CHECK(read_text(a / name) == read_text(b / name));
  }
  ScenarioConfig other = cfg;
  other.seed = 2;
  write_simulation(simulate(other), other, c.path());
  CHECK(read_text(a / "keypoints.csv") != read_text(c / "keypoints.csv"));
}

TEST_CASE("stream lengths follow the sensor rates") {
  const ScenarioConfig cfg = five_cycles();
  const SimulationOutput sim = simulate(cfg);
  const double d = cfg.duration_s();
  CHECK(d == doctest::Approx(14.0));
  CHECK(within(sim.keypoints.size(), std::floor(d * cfg.rates.camera_hz)));
  CHECK(within(sim.encoder.size(), std::floor(d * cfg.rates.encoder_hz)));
  CHECK(within(sim.force_plate.size(), std::floor(d * cfg.rates.force_plate_hz)));
  CHECK(within(sim.truth.x_true.size(), std::floor(d * kTruthRateHz)));
  CHECK(sim.truth.rep_count_true == 5);
  for (std::size_t i = 1; i < sim.keypoints.size(); ++i)
    CHECK(sim.keypoints.timestamps[i] > sim.keypoints.timestamps[i - 1]);
}

TEST_CASE("hip path moves exactly x along the rail") {
  const SimulationOutput sim = simulate(five_cycles());
  const Vec3 hip0 = sim.truth.hip_path_3d.points.front();
  for (std::size_t i = 0; i < sim.truth.x_true.size(); ++i)
    CHECK(std::abs((sim.truth.hip_path_3d.points[i] - hip0).norm() - sim.truth.x_true.displacement[i]) < 1e-12);
}

TEST_CASE("true force follows the sinusoid through the sled balance") {
  const ScenarioConfig cfg = five_cycles();
  const SimulationOutput sim = simulate(cfg);
  const double w = 2 * std::numbers::pi * cfg.sinusoid.frequency_hz;
  const double a = cfg.sinusoid.amplitude_m;
  const oracle::LegPress lp = to_oracle(cfg.params);
  for (std::size_t i = 0; i < sim.truth.x_true.size(); ++i) {
    const double t = sim.truth.x_true.timestamps[i];
    // Acceleration switches on at onset and off at the end of the last cycle.
    const bool moving = t >= cfg.motion_start_s() && t < cfg.motion_end_s();
    const double x = moving ? a * (1 - std::cos(w * (t - cfg.lead_in_s))) : 0.0;
    const double acc = moving ? a * w * w * std::cos(w * (t - cfg.lead_in_s)) : 0.0;
    CHECK(std::abs(sim.truth.x_true.displacement[i] - x) < 1e-12);
    CHECK(sim.truth.f_true.force[i] == doctest::Approx(oracle::plate_force(lp, acc)).epsilon(1e-12));
  }
}

TEST_CASE("constant force produces a parabola") {
  ScenarioConfig cfg;
  cfg.motion = MotionKind::force_profile;
  const double f = force_from_acceleration(0.4, cfg.params);
  cfg.force_profile.timestamps = {0.0, 3.0};
  cfg.force_profile.force = {f, f};
  const MotionModel model(cfg);
  const double a = acceleration_from_force(f, cfg.params);
  CHECK(a == doctest::Approx(0.4));
  for (double t = 0.0; t <= 3.0; t += 0.0137) {
    CHECK(model.displacement(t) == doctest::Approx(0.5 * a * t * t).epsilon(1e-10));
    CHECK(model.acceleration(t) == doctest::Approx(a).epsilon(1e-10));
  }

  // Force ramps down across exactly one integration step; RK4 is exact for
  // piecewise-linear acceleration aligned with its grid.
  const double h = 1.0 / kTruthRateHz;
  cfg.force_profile.timestamps = {0.0, 1.0, 1.0 + h, 2.0};
  const double f2 = force_from_acceleration(-0.2, cfg.params);
  cfg.force_profile.force = {f, f, f2, f2};
  const MotionModel stepped(cfg);
  const double x1 = 0.2 + 0.4 * h + 0.4 * h * h / 2 - 0.6 * h * h / 6;
  const double v1 = 0.4 + h * (0.4 - 0.2) / 2;
  for (int k = 0; k <= 999; k += 37) {
    const double s = k * h;
    CHECK(stepped.displacement(1.0 + h + s) == doctest::Approx(x1 + v1 * s - 0.1 * s * s).epsilon(1e-10));
  }
}

TEST_CASE("noise-free camera stream triangulates onto the hip path") {
  const ScenarioConfig cfg = noise_free(five_cycles());
  const SimulationOutput sim = simulate(cfg);
  const MotionModel model(cfg);
  const Trajectory3D traj = track_to_trajectory(sim.keypoints, cfg.camera);
  REQUIRE(traj.size() == sim.keypoints.size());
  const Vec3 dir = cfg.rail.direction.normalized();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vec3 expected = cfg.rail.origin + model.displacement(traj.timestamps[i]) * dir;
    CHECK((traj.points[i] - expected).norm() < 1e-9);
  }
  const InvertCheckReport r = invert_check(cfg);
  CHECK(r.estimate.reps.count == 5);
  CHECK(r.reps_true == 5);
  CHECK(r.sensors.reps_measured == 5);
}

TEST_CASE("encoder quantization error stays within half a count") {
  ScenarioConfig cfg = five_cycles();
  cfg.noise.counts_per_rev = 360;
  const SimulationOutput sim = simulate(cfg);
  const MotionModel model(cfg);
  const DisplacementSeries d = encoder_displacement(sim.encoder, cfg.params.r1_m);
  const double half_count = std::numbers::pi * cfg.params.r1_m / 360.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    CHECK(std::abs(d.displacement[i] - model.displacement(d.timestamps[i])) <= half_count + 1e-12);
  CHECK(sim.encoder.counts.front() == 0);
}

TEST_CASE("force plate noise has the configured spread") {
  ScenarioConfig cfg = five_cycles();
  cfg.noise.force_noise_std_n = 5.0;
  const SimulationOutput sim = simulate(cfg);
  const MotionModel model(cfg);
  double ss = 0;
  for (std::size_t i = 0; i < sim.force_plate.size(); ++i)
    ss += std::pow(sim.force_plate.force[i] - model.force(sim.force_plate.timestamps[i]), 2);
  CHECK(std::sqrt(ss / sim.force_plate.size()) == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("scenario errors") {
  SUBCASE("rail behind the camera") {
    ScenarioConfig cfg = five_cycles();
    cfg.rail.origin = Vec3(0.0, 0.0, 0.1);
    cfg.rail.direction = Vec3(0.0, 0.0, -1.0);
    try {
      simulate(cfg);
      FAIL("expected scenario error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::scenario);
    }
  }
  SUBCASE("invalid settings") {
    ScenarioConfig cfg = five_cycles();
    cfg.sinusoid.amplitude_m = -0.1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = five_cycles();
    cfg.noise.camera_jitter_fraction = 0.7;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = five_cycles();
    cfg.motion = MotionKind::force_profile;
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
}

TEST_CASE("scenario files round trip") {
  TempDir dir("scenario");
  ScenarioConfig cfg = five_cycles();
  cfg.seed = 123456789012345ULL;
  cfg.leg = Leg::left;
  cfg.load_fraction = 0.3;
  cfg.sinusoid.frequency_hz = 0.4321;
  cfg.camera_clock_offset_s = 0.25;
  cfg.rail.direction = Vec3(1.0, -0.2, 0.1);
  cfg.noise.dropout_probability = 0.05;
  write_text(dir / "scenario.cfg", format_scenario(cfg));
  const ScenarioConfig back = read_scenario(dir / "scenario.cfg");
  CHECK(back.seed == cfg.seed);
  CHECK(back.leg == Leg::left);
  CHECK(back.sinusoid.frequency_hz == cfg.sinusoid.frequency_hz);
  CHECK(format_scenario(back) == format_scenario(cfg));

  write_text(dir / "bad.cfg", "amplitude_m = 0.2\nwobble = 3\n");
  CHECK_THROWS_AS(read_scenario(dir / "bad.cfg"), DataError);
}

TEST_CASE("written simulation inverts the same as the in-memory one") {
  const ScenarioConfig cfg = five_cycles();
  TempDir dir("inv");
  write_simulation(simulate(cfg), cfg, dir.path());
  const InvertCheckReport mem = invert_check(cfg);
  const InvertCheckReport disk = invert_check_dir(dir.path());
  CHECK(format_invert_check(mem) == format_invert_check(disk));
}

TEST_CASE("displacement error grows with pixel noise") {
  std::vector<double> mean_error;
  for (double sigma : {0.0, 0.5, 1.0, 2.0}) {
    double sum = 0;
    const int seeds = 20;
    for (int s = 1; s <= seeds; ++s) {
      ScenarioConfig cfg = five_cycles();
      cfg.seed = static_cast<std::uint64_t>(s);
      cfg.noise.pixel_std_px = sigma;
      sum += invert_check(cfg).displacement_vs_truth.nrmse_percent;
    }
    mean_error.push_back(sum / seeds);
  }
  for (std::size_t i = 1; i < mean_error.size(); ++i) CHECK(mean_error[i] > mean_error[i - 1]);
}

TEST_CASE("cohort layout") {
  CohortConfig cohort;
  cohort.subjects = 3;
  cohort.weeks = 4;
  const auto trials = make_cohort(cohort);
  CHECK(trials.size() == 3u * 4 * 2 * 2);
  std::set<std::string> ids;
  std::set<std::uint64_t> seeds;
  for (const ScenarioConfig& t : trials) {
    ids.insert(t.trial_id);
    seeds.insert(t.seed);
    CHECK_NOTHROW(t.validate());
    CHECK(t.params.stack_mass_kg == doctest::Approx(t.load_fraction * t.params.patient_mass_kg));
  }
  CHECK(ids.size() == trials.size());
  CHECK(seeds.size() == trials.size());
  CHECK(ids.count("S01_W01_R_50") == 1);
  CHECK(ids.count("S03_W04_L_30") == 1);

  // Involved leg: the true peak force grows by the configured gain.
  const auto peak = [](const ScenarioConfig& c) {
    const double w = 2 * std::numbers::pi * c.sinusoid.frequency_hz;
    return force_from_acceleration(c.sinusoid.amplitude_m * w * w, c.params);
  };
  const auto find = [&](const std::string& id) {
    return *std::find_if(trials.begin(), trials.end(), [&](const ScenarioConfig& c) { return c.trial_id == id; });
  };
  CHECK(peak(find("S02_W04_R_50")) / peak(find("S02_W01_R_50")) == doctest::Approx(1.095).epsilon(1e-9));
  CHECK(peak(find("S02_W04_L_50")) == doctest::Approx(peak(find("S02_W01_L_50"))));

  const auto again = make_cohort(cohort);
  for (std::size_t i = 0; i < trials.size(); ++i) CHECK(format_scenario(again[i]) == format_scenario(trials[i]));
}
