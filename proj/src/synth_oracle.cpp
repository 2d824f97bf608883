#include "legscreen/synth_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "legscreen/errors.hpp"
#include "legscreen/io.hpp"

namespace legscreen {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDetectedConfidence = 0.9;

// Independent stream per noise source so switching one source off leaves the
// draws of the others untouched.
enum Stream : std::uint32_t { jitter_stream = 1, pixel_stream = 2, dropout_stream = 3, force_stream = 4 };

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double value_at(const std::vector<double>& t, const std::vector<double>& v, double q) {
  if (q <= t.front()) return v.front();
  if (q >= t.back()) return v.back();
  const auto it = std::upper_bound(t.begin(), t.end(), q);
  const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
  const double s = (q - t[i]) / (t[i + 1] - t[i]);
  return v[i] + s * (v[i + 1] - v[i]);
}

std::size_t sample_count(double duration, double rate) {
  return static_cast<std::size_t>(std::floor(duration * rate + 1e-9));
}

}  // namespace

// --- scenario ----------------------------------------------------------------

void ScenarioConfig::validate() const {
  params.validate();
  camera.validate();
  if (!(rates.camera_hz > 0 && rates.encoder_hz > 0 && rates.force_plate_hz > 0))
    fail(ErrorKind::scenario, "sensor rates must be > 0");
  if (motion == MotionKind::sinusoid) {
    if (!(sinusoid.amplitude_m > 0)) fail(ErrorKind::scenario, "amplitude must be > 0");
    if (!(sinusoid.frequency_hz > 0)) fail(ErrorKind::scenario, "frequency must be > 0");
    if (sinusoid.cycles < 1) fail(ErrorKind::scenario, "cycles must be >= 1");
    if (!(lead_in_s >= 0 && lead_out_s >= 0)) fail(ErrorKind::scenario, "lead-in/out must be >= 0");
  } else {
    const auto& fp = force_profile;
    if (fp.timestamps.size() < 2 || fp.timestamps.size() != fp.force.size())
      fail(ErrorKind::scenario, "force profile needs >= 2 (t, force) samples");
    for (std::size_t i = 1; i < fp.timestamps.size(); ++i)
      if (!(fp.timestamps[i] > fp.timestamps[i - 1]))
        fail(ErrorKind::scenario, "force profile timestamps must increase");
    if (!(fp.timestamps.back() > 0)) fail(ErrorKind::scenario, "force profile must end after t = 0");
  }
  if (!(noise.pixel_std_px >= 0 && noise.force_noise_std_n >= 0))
    fail(ErrorKind::scenario, "noise levels must be >= 0");
  if (noise.counts_per_rev < 1) fail(ErrorKind::scenario, "counts_per_rev must be >= 1");
  if (!(noise.camera_jitter_fraction >= 0 && noise.camera_jitter_fraction < 0.5))
    fail(ErrorKind::scenario, "camera jitter fraction must be in [0, 0.5)");
  if (!(noise.dropout_probability >= 0 && noise.dropout_probability < 1))
    fail(ErrorKind::scenario, "dropout probability must be in [0, 1)");
  if (!(rail.direction.norm() > 0)) fail(ErrorKind::scenario, "rail direction must be non-zero");
}

double ScenarioConfig::duration_s() const {
  if (motion == MotionKind::force_profile) return force_profile.timestamps.back();
  return lead_in_s + sinusoid.cycles / sinusoid.frequency_hz + lead_out_s;
}

double ScenarioConfig::motion_start_s() const {
  return motion == MotionKind::force_profile ? 0.0 : lead_in_s;
}

double ScenarioConfig::motion_end_s() const {
  return motion == MotionKind::force_profile ? duration_s() : lead_in_s + sinusoid.cycles / sinusoid.frequency_hz;
}

// --- kinematics ----------------------------------------------------------------

MotionModel::MotionModel(const ScenarioConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.motion != MotionKind::force_profile) return;

  const auto& fp = cfg_.force_profile;
  const auto accel = [&](double t) { return acceleration_from_force(value_at(fp.timestamps, fp.force, t), cfg_.params); };
  const double end = cfg_.duration_s();
  const auto steps = static_cast<std::size_t>(std::ceil(end / step_ - 1e-9));
  grid_x_.assign(steps + 1, 0.0);
  grid_v_.assign(steps + 1, 0.0);
  double x = 0.0, v = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * step_;
    const double h = step_;
    const double k1x = v, k1v = accel(t);
    const double k2x = v + 0.5 * h * k1v, k2v = accel(t + 0.5 * h);
    const double k3x = v + 0.5 * h * k2v, k3v = k2v;
    const double k4x = v + h * k3v, k4v = accel(t + h);
    x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    grid_x_[i + 1] = x;
    grid_v_[i + 1] = v;
  }
}

double MotionModel::displacement(double t) const {
  if (cfg_.motion == MotionKind::sinusoid) {
    const double t0 = cfg_.motion_start_s();
    if (t <= t0 || t >= cfg_.motion_end_s()) return 0.0;
    return cfg_.sinusoid.amplitude_m * (1.0 - std::cos(kTwoPi * cfg_.sinusoid.frequency_hz * (t - t0)));
  }
  const std::size_t last = grid_x_.size() - 1;
  if (t <= 0) return 0.0;
  const double pos = t / step_;
  if (pos >= static_cast<double>(last)) return grid_x_[last] + grid_v_[last] * (t - static_cast<double>(last) * step_);
  const auto i = static_cast<std::size_t>(pos);
  const double s = pos - static_cast<double>(i);
  const double s2 = s * s, s3 = s2 * s;
  // Cubic Hermite on (x, v) at both ends of the step.
  return (2 * s3 - 3 * s2 + 1) * grid_x_[i] + (s3 - 2 * s2 + s) * step_ * grid_v_[i] +
         (-2 * s3 + 3 * s2) * grid_x_[i + 1] + (s3 - s2) * step_ * grid_v_[i + 1];
}

double MotionModel::acceleration(double t) const {
  if (cfg_.motion == MotionKind::sinusoid) {
    const double t0 = cfg_.motion_start_s();
    if (t < t0 || t >= cfg_.motion_end_s()) return 0.0;
    const double w = kTwoPi * cfg_.sinusoid.frequency_hz;
    return cfg_.sinusoid.amplitude_m * w * w * std::cos(w * (t - t0));
  }
  return acceleration_from_force(force(t), cfg_.params);
}

double MotionModel::force(double t) const {
  if (cfg_.motion == MotionKind::sinusoid) return force_from_acceleration(acceleration(t), cfg_.params);
  const auto& fp = cfg_.force_profile;
  return value_at(fp.timestamps, fp.force, t);
}

// --- simulation ----------------------------------------------------------------

SimulationOutput simulate(const ScenarioConfig& cfg) {
  const MotionModel model(cfg);
  const double duration = cfg.duration_s();
  const Vec3 dir = cfg.rail.direction.normalized();
  const auto hip_at = [&](double t) -> Vec3 { return cfg.rail.origin + model.displacement(t) * dir; };

  SimulationOutput out;
  GroundTruthBundle& truth = out.truth;
  const std::size_t n_truth = sample_count(duration, kTruthRateHz) + 1;
  truth.x_true.source = SeriesSource::truth;
  truth.f_true.source = SeriesSource::truth;
  truth.x_true.timestamps = uniform_grid(0.0, 1.0 / kTruthRateHz, n_truth);
  truth.f_true.timestamps = truth.x_true.timestamps;
  truth.hip_path_3d.timestamps = truth.x_true.timestamps;
  for (double t : truth.x_true.timestamps) {
    truth.x_true.displacement.push_back(model.displacement(t));
    truth.f_true.force.push_back(model.force(t));
    truth.hip_path_3d.points.push_back(hip_at(t));
  }
  if (cfg.motion == MotionKind::sinusoid) {
    truth.rep_count_true = cfg.sinusoid.cycles;
  } else {
    const auto& tt = truth.x_true.timestamps;
    truth.rep_count_true = count_reps(truth.x_true, {tt.front(), tt.back()}).count;
  }

  // Camera: jittered frame times, pinhole projection, pixel noise, dropouts.
  {
    auto jitter_rng = make_engine(cfg.seed, jitter_stream);
    auto pixel_rng = make_engine(cfg.seed, pixel_stream);
    auto drop_rng = make_engine(cfg.seed, dropout_stream);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t frames = sample_count(duration, cfg.rates.camera_hz);
    KeypointTrack& track = out.keypoints;
    track.joint_name = "hip";
    const double sigma = cfg.noise.pixel_std_px;
    for (std::size_t k = 0; k < frames; ++k) {
      const double j = cfg.noise.camera_jitter_fraction * unit(jitter_rng);
      const double t = std::max(0.0, (static_cast<double>(k) + j) / cfg.rates.camera_hz);
      const Vec3 hip = hip_at(t);
      if (!(hip.z() > 0))
        fail(ErrorKind::scenario, "hip passes behind the camera; check the rail pose");
      const StereoPair exact = project(hip, cfg.camera);
      for (const Keypoint2D* kp : {&exact.left, &exact.right}) {
        if (kp->x < 0 || kp->x > cfg.camera.width || kp->y < 0 || kp->y > cfg.camera.height)
          fail(ErrorKind::scenario, "hip leaves the camera image; check the rail pose");
      }
      Keypoint2D l = exact.left, r = exact.right;
      const double zl_x = gauss(pixel_rng), zl_y = gauss(pixel_rng);
      const double zr_x = gauss(pixel_rng), zr_y = gauss(pixel_rng);
      l.x += sigma * zl_x;
      l.y += sigma * zl_y;
      r.x += sigma * zr_x;
      r.y += sigma * zr_y;
      const bool drop_l = u01(drop_rng) < cfg.noise.dropout_probability;
      const bool drop_r = u01(drop_rng) < cfg.noise.dropout_probability;
      l.confidence = drop_l ? 0.0 : kDetectedConfidence;
      r.confidence = drop_r ? 0.0 : kDetectedConfidence;
      track.timestamps.push_back(t + cfg.camera_clock_offset_s);
      track.left.push_back(l);
      track.right.push_back(r);
    }
  }

  // Encoder: ideal quantizer on the strap pulley.
  {
    EncoderStream& enc = out.encoder;
    enc.counts_per_rev = cfg.noise.counts_per_rev;
    const std::size_t n = sample_count(duration, cfg.rates.encoder_hz);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / cfg.rates.encoder_hz;
      const double revs = model.displacement(t) / (kTwoPi * cfg.params.r1_m);
      enc.timestamps.push_back(t);
      enc.counts.push_back(std::llround(revs * cfg.noise.counts_per_rev));
    }
  }

  // Force plate.
  {
    auto force_rng = make_engine(cfg.seed, force_stream);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ForceSeries& plate = out.force_plate;
    plate.source = SeriesSource::force_plate;
    const std::size_t n = sample_count(duration, cfg.rates.force_plate_hz);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / cfg.rates.force_plate_hz;
      plate.timestamps.push_back(t);
      plate.force.push_back(model.force(t) + cfg.noise.force_noise_std_n * gauss(force_rng));
    }
  }
  return out;
}

// --- scenario files --------------------------------------------------------------

namespace {

const char* const kProfileFile = "force_profile.csv";

std::string vec3_text(const Vec3& v) {
  return format_real(v.x()) + "," + format_real(v.y()) + "," + format_real(v.z());
}

Vec3 parse_vec3(const KeyValueFile& kv, std::string_view key, const Vec3& fallback) {
  const auto* e = kv.find(key);
  if (!e) return fallback;
  Vec3 v;
  std::stringstream ss(e->value);
  std::string part;
  int i = 0;
  while (std::getline(ss, part, ',')) {
    if (i == 3) throw DataError(kv.path(), e->line, "expected x,y,z for '" + e->key + "'");
    v[i++] = parse_real(part, kv.path(), e->line);
  }
  if (i != 3) throw DataError(kv.path(), e->line, "expected x,y,z for '" + e->key + "'");
  return v;
}

}  // namespace

ScenarioConfig read_scenario(const fs::path& path) {
  const auto kv = KeyValueFile::read(path);
  kv.reject_unknown({"motion",           "amplitude_m",    "frequency_hz",      "cycles",
                     "force_profile_path", "lead_in_s",    "lead_out_s",        "m_kg",
                     "m_s_kg",           "m_w_kg",         "I_kgm2",            "r1_m",
                     "r2_m",             "alpha_rad",      "beta_rad",          "g",
                     "focal_px",         "cx",             "cy",                "baseline_m",
                     "width",            "height",         "rail_origin",       "rail_direction",
                     "pixel_std_px",     "counts_per_rev", "force_noise_std_N", "camera_jitter_fraction",
                     "dropout_probability", "camera_hz",   "encoder_hz",        "force_plate_hz",
                     "camera_clock_offset_s", "seed",      "trial_id",          "subject_id",
                     "session_week",     "leg",            "load_fraction"});
  ScenarioConfig c;
  const std::string motion = kv.text_or("motion", "sinusoid");
  if (motion == "sinusoid") {
    c.motion = MotionKind::sinusoid;
  } else if (motion == "force_profile") {
    c.motion = MotionKind::force_profile;
  } else {
    throw DataError(kv.path(), kv.find("motion")->line, "motion must be sinusoid or force_profile");
  }
  c.sinusoid.amplitude_m = kv.real_or("amplitude_m", c.sinusoid.amplitude_m);
  c.sinusoid.frequency_hz = kv.real_or("frequency_hz", c.sinusoid.frequency_hz);
  c.sinusoid.cycles = static_cast<int>(kv.integer_or("cycles", c.sinusoid.cycles));
  if (c.motion == MotionKind::force_profile) {
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const fs::path profile = base / kv.text_or("force_profile_path", kProfileFile);
    const ForceSeries fp = read_force(profile);
    c.force_profile = {fp.timestamps, fp.force};
  }
  c.lead_in_s = kv.real_or("lead_in_s", c.lead_in_s);
  c.lead_out_s = kv.real_or("lead_out_s", c.lead_out_s);

  auto& p = c.params;
  p.patient_mass_kg = kv.real_or("m_kg", p.patient_mass_kg);
  p.sled_mass_kg = kv.real_or("m_s_kg", p.sled_mass_kg);
  p.stack_mass_kg = kv.real_or("m_w_kg", p.stack_mass_kg);
  p.pulley_inertia_kgm2 = kv.real_or("I_kgm2", p.pulley_inertia_kgm2);
  p.r1_m = kv.real_or("r1_m", p.r1_m);
  p.r2_m = kv.real_or("r2_m", p.r2_m);
  p.alpha_rad = kv.real_or("alpha_rad", p.alpha_rad);
  p.beta_rad = kv.real_or("beta_rad", p.beta_rad);
  p.g = kv.real_or("g", p.g);

  auto& cam = c.camera;
  cam.focal_length_px = kv.real_or("focal_px", cam.focal_length_px);
  cam.cx = kv.real_or("cx", cam.cx);
  cam.cy = kv.real_or("cy", cam.cy);
  cam.baseline_m = kv.real_or("baseline_m", cam.baseline_m);
  cam.width = static_cast<int>(kv.integer_or("width", cam.width));
  cam.height = static_cast<int>(kv.integer_or("height", cam.height));

  c.rail.origin = parse_vec3(kv, "rail_origin", c.rail.origin);
  c.rail.direction = parse_vec3(kv, "rail_direction", c.rail.direction);

  c.noise.pixel_std_px = kv.real_or("pixel_std_px", c.noise.pixel_std_px);
  c.noise.counts_per_rev = static_cast<int>(kv.integer_or("counts_per_rev", c.noise.counts_per_rev));
  c.noise.force_noise_std_n = kv.real_or("force_noise_std_N", c.noise.force_noise_std_n);
  c.noise.camera_jitter_fraction = kv.real_or("camera_jitter_fraction", c.noise.camera_jitter_fraction);
  c.noise.dropout_probability = kv.real_or("dropout_probability", c.noise.dropout_probability);

  c.rates.camera_hz = kv.real_or("camera_hz", c.rates.camera_hz);
  c.rates.encoder_hz = kv.real_or("encoder_hz", c.rates.encoder_hz);
  c.rates.force_plate_hz = kv.real_or("force_plate_hz", c.rates.force_plate_hz);
  c.camera_clock_offset_s = kv.real_or("camera_clock_offset_s", c.camera_clock_offset_s);

  const long long seed = kv.integer_or("seed", static_cast<long long>(c.seed));
  if (seed < 0) throw DataError(kv.path(), kv.find("seed")->line, "seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);

  c.trial_id = kv.text_or("trial_id", c.trial_id);
  c.subject_id = kv.text_or("subject_id", c.subject_id);
  c.session_week = static_cast<int>(kv.integer_or("session_week", c.session_week));
  if (const auto* e = kv.find("leg")) {
    try {
      c.leg = parse_leg(e->value);
    } catch (const Error& err) {
      throw DataError(kv.path(), e->line, err.what());
    }
  }
  c.load_fraction = kv.real_or("load_fraction", c.load_fraction);

  try {
    c.validate();
  } catch (const Error& err) {
    throw DataError(kv.path(), 0, err.what());
  }
  return c;
}

std::string format_scenario(const ScenarioConfig& c) {
  std::ostringstream o;
  const auto line = [&](std::string_view key, const std::string& value) { o << key << " = " << value << '\n'; };
  const auto real = [&](std::string_view key, double v) { line(key, format_real(v)); };

  line("trial_id", c.trial_id);
  line("subject_id", c.subject_id);
  line("session_week", std::to_string(c.session_week));
  line("leg", std::string(to_string(c.leg)));
  real("load_fraction", c.load_fraction);
  line("seed", std::to_string(c.seed));
  o << '\n';
  if (c.motion == MotionKind::sinusoid) {
    line("motion", "sinusoid");
    real("amplitude_m", c.sinusoid.amplitude_m);
    real("frequency_hz", c.sinusoid.frequency_hz);
    line("cycles", std::to_string(c.sinusoid.cycles));
    real("lead_in_s", c.lead_in_s);
    real("lead_out_s", c.lead_out_s);
  } else {
    line("motion", "force_profile");
    line("force_profile_path", kProfileFile);
  }
  o << '\n';
  const auto& p = c.params;
  real("m_kg", p.patient_mass_kg);
  real("m_s_kg", p.sled_mass_kg);
  real("m_w_kg", p.stack_mass_kg);
  real("I_kgm2", p.pulley_inertia_kgm2);
  real("r1_m", p.r1_m);
  real("r2_m", p.r2_m);
  real("alpha_rad", p.alpha_rad);
  real("beta_rad", p.beta_rad);
  real("g", p.g);
  o << '\n';
  const auto& cam = c.camera;
  real("focal_px", cam.focal_length_px);
  real("cx", cam.cx);
  real("cy", cam.cy);
  real("baseline_m", cam.baseline_m);
  line("width", std::to_string(cam.width));
  line("height", std::to_string(cam.height));
  line("rail_origin", vec3_text(c.rail.origin));
  line("rail_direction", vec3_text(c.rail.direction));
  o << '\n';
  real("pixel_std_px", c.noise.pixel_std_px);
  line("counts_per_rev", std::to_string(c.noise.counts_per_rev));
  real("force_noise_std_N", c.noise.force_noise_std_n);
  real("camera_jitter_fraction", c.noise.camera_jitter_fraction);
  real("dropout_probability", c.noise.dropout_probability);
  real("camera_hz", c.rates.camera_hz);
  real("encoder_hz", c.rates.encoder_hz);
  real("force_plate_hz", c.rates.force_plate_hz);
  real("camera_clock_offset_s", c.camera_clock_offset_s);
  return o.str();
}

namespace {

void write_trial_files(const SimulationOutput& sim, const ScenarioConfig& cfg, const fs::path& dir) {
  write_text(dir / "scenario.cfg", format_scenario(cfg));
  if (cfg.motion == MotionKind::force_profile)
    write_text(dir / kProfileFile,
               format_force({cfg.force_profile.timestamps, cfg.force_profile.force, SeriesSource::truth}));
  write_text(dir / "params.txt", format_params(cfg.params));
  write_text(dir / "keypoints.csv", format_keypoints(sim.keypoints));
  write_text(dir / "encoder.csv", format_encoder(sim.encoder));
  write_text(dir / "force_plate.csv", format_force(sim.force_plate));
}

TrialRecord trial_record(const ScenarioConfig& cfg, const fs::path& dir) {
  TrialRecord t;
  t.trial_id = cfg.trial_id;
  t.subject_id = cfg.subject_id;
  t.session_week = cfg.session_week;
  t.leg = cfg.leg;
  t.load_fraction = cfg.load_fraction;
  t.keypoint_path = dir / "keypoints.csv";
  t.encoder_path = dir / "encoder.csv";
  t.force_path = dir / "force_plate.csv";
  t.params_path = dir / "params.txt";
  return t;
}

}  // namespace

void write_simulation(const SimulationOutput& sim, const ScenarioConfig& cfg, const fs::path& dir) {
  write_trial_files(sim, cfg, dir);
  write_text(dir / "calibration.txt", format_calibration(cfg.camera));
  write_text(dir / "truth_displacement.csv", format_displacement(sim.truth.x_true));
  write_text(dir / "truth_force.csv", format_force(sim.truth.f_true));
  Manifest m;
  m.calibration_path = dir / "calibration.txt";
  m.params_path = dir / "params.txt";
  TrialRecord t = trial_record(cfg, dir);
  t.params_path.clear();
  m.trials.push_back(std::move(t));
  write_text(dir / "manifest.csv", format_manifest(m, dir));
}

// --- closed loop ---------------------------------------------------------------

namespace {

InvertCheckReport score(const ScenarioConfig& cfg, const KeypointTrack& track, const StereoCalibration& calib,
                        const LegPressParams& params, const EncoderStream& encoder, const ForceSeries& plate,
                        const PipelineConfig& pipeline) {
  InvertCheckReport r;
  r.estimate = estimate_trial(track, calib, params, pipeline);
  const auto& est = r.estimate;

  const MotionModel model(cfg);
  std::vector<double> est_x, true_x, est_f, true_f;
  const auto& grid = est.displacement.timestamps;
  r.peak_force_true = -std::numeric_limits<double>::infinity();
  for (std::size_t i : window_indices(grid, est.window)) {
    const double t = grid[i] - cfg.camera_clock_offset_s;
    est_x.push_back(est.displacement.displacement[i]);
    true_x.push_back(model.displacement(t));
    est_f.push_back(est.force.force[i]);
    true_f.push_back(model.force(t));
  }
  r.displacement_vs_truth = accuracy(est_x, true_x);
  r.force_vs_truth = accuracy(est_f, true_f);

  // True peak over the same window, on the 1 kHz truth grid.
  const double w0 = est.window.start - cfg.camera_clock_offset_s;
  const double w1 = est.window.end - cfg.camera_clock_offset_s;
  for (double t = std::max(0.0, std::ceil(w0 * kTruthRateHz) / kTruthRateHz); t <= w1; t += 1.0 / kTruthRateHz)
    r.peak_force_true = std::max(r.peak_force_true, model.force(t));

  r.reps_true = cfg.motion == MotionKind::sinusoid
                    ? cfg.sinusoid.cycles
                    : simulate(cfg).truth.rep_count_true;
  r.sensors = compare_with_sensors(est, encoder_displacement(encoder, params.r1_m), plate, pipeline);
  return r;
}

}  // namespace

InvertCheckReport invert_check(const ScenarioConfig& cfg, const PipelineConfig& pipeline) {
  const SimulationOutput sim = simulate(cfg);
  return score(cfg, sim.keypoints, cfg.camera, cfg.params, sim.encoder, sim.force_plate, pipeline);
}

InvertCheckReport invert_check_dir(const fs::path& dir, const PipelineConfig& pipeline) {
  const ScenarioConfig cfg = read_scenario(dir / "scenario.cfg");
  return score(cfg, read_keypoints(dir / "keypoints.csv"), read_calibration(dir / "calibration.txt"),
               read_params(dir / "params.txt"), read_encoder(dir / "encoder.csv"), read_force(dir / "force_plate.csv"),
               pipeline);
}

std::string format_invert_check(const InvertCheckReport& r) {
  std::ostringstream o;
  const auto row = [&](std::string_view key, const std::string& v) { o << key << ',' << v << '\n'; };
  const auto real = [&](std::string_view key, double v) { row(key, format_real(v)); };
  const auto& est = r.estimate;
  o << "metric,value\n";
  row("frames_used", std::to_string(est.trajectory.size()));
  row("collinear", est.projection.collinear ? "true" : "false");
  real("pca_eigenvalue_1", est.projection.axes.eigenvalues[0]);
  real("pca_eigenvalue_2", est.projection.axes.eigenvalues[1]);
  real("pca_eigenvalue_3", est.projection.axes.eigenvalues[2]);
  row("reps_est", std::to_string(est.reps.count));
  row("reps_true", std::to_string(r.reps_true));
  row("reps_meas", std::to_string(r.sensors.reps_measured));
  real("peak_force_est_N", est.peak_force);
  real("peak_force_true_N", r.peak_force_true);
  real("peak_force_meas_N", r.sensors.peak_force_measured);
  real("disp_rmse_truth_m", r.displacement_vs_truth.rmse);
  real("disp_nrmse_truth_pct", r.displacement_vs_truth.nrmse_percent);
  real("force_rmse_truth_N", r.force_vs_truth.rmse);
  real("force_nrmse_truth_pct", r.force_vs_truth.nrmse_percent);
  real("disp_rmse_meas_m", r.sensors.displacement.rmse);
  real("disp_nrmse_meas_pct", r.sensors.displacement.nrmse_percent);
  real("force_rmse_meas_N", r.sensors.force.rmse);
  real("force_nrmse_meas_pct", r.sensors.force.nrmse_percent);
  real("lag_s", r.sensors.alignment.lag_s);
  real("lag_correlation", r.sensors.alignment.correlation);
  return o.str();
}

// --- cohort --------------------------------------------------------------------

std::vector<ScenarioConfig> make_cohort(const CohortConfig& cohort) {
  if (cohort.subjects < 1 || cohort.weeks < 2 || cohort.weeks > kMaxSessionWeek)
    fail(ErrorKind::scenario, "cohort needs >= 1 subject and 2..12 weeks");
  if (cohort.load_fractions.empty()) fail(ErrorKind::scenario, "cohort needs at least one load");
  const ScenarioConfig& base = cohort.base;
  if (base.motion != MotionKind::sinusoid) fail(ErrorKind::scenario, "cohort trials use sinusoid motion");

  std::seed_seq seq{static_cast<std::uint32_t>(cohort.seed), static_cast<std::uint32_t>(cohort.seed >> 32), 99u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> mass(60.0, 90.0), freq(0.42, 0.50), amp(0.18, 0.22);
  const double active = 35.0 - base.lead_in_s - base.lead_out_s;
  if (!(active > 0)) fail(ErrorKind::scenario, "lead-in/out leave no room in a 35 s trial");

  std::vector<ScenarioConfig> out;
  std::uint64_t index = 0;
  for (int s = 1; s <= cohort.subjects; ++s) {
    const double m = mass(rng), f0 = freq(rng), a = amp(rng);
    char subject[16];
    std::snprintf(subject, sizeof subject, "S%02d", s);
    for (int week = 1; week <= cohort.weeks; ++week) {
      const double progress = static_cast<double>(week - 1) / (cohort.weeks - 1);
      for (Leg leg : {Leg::right, Leg::left}) {
        for (double load : cohort.load_fractions) {
          ScenarioConfig c = base;
          c.params.patient_mass_kg = m;
          c.params.stack_mass_kg = load * m;
          // The right (involved) leg gains peak force linearly through range
          // of motion and cadence in equal log shares; the left keeps a
          // healthy, constant pattern.
          const double w0 = kTwoPi * f0;
          const double peak0 = force_from_acceleration(a * w0 * w0, c.params);
          double amplitude = 1.1 * a;
          double f = 1.15 * f0;
          if (leg == Leg::right) {
            const double target = peak0 * (1.0 + cohort.peak_force_gain * progress);
            const double accel = acceleration_from_force(target, c.params);
            if (!(accel > 0)) fail(ErrorKind::scenario, "cohort peak-force target is below the static load");
            const double k = accel / (a * w0 * w0);
            amplitude = a * std::sqrt(k);
            f = f0 * std::sqrt(std::sqrt(k));
          }
          c.sinusoid.amplitude_m = amplitude;
          c.sinusoid.frequency_hz = f;
          c.sinusoid.cycles = std::max(1, static_cast<int>(std::floor(f * active)));
          c.seed = cohort.seed * 1000003ULL + (++index);
          c.subject_id = subject;
          c.session_week = week;
          c.leg = leg;
          c.load_fraction = load;
          char id[48];
          std::snprintf(id, sizeof id, "%s_W%02d_%c_%02d", subject, week, leg == Leg::right ? 'R' : 'L',
                        static_cast<int>(std::lround(load * 100)));
          c.trial_id = id;
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

void write_cohort(const CohortConfig& cohort, const fs::path& dir) {
  const auto trials = make_cohort(cohort);
  Manifest m;
  m.calibration_path = dir / "calibration.txt";
  write_text(m.calibration_path, format_calibration(cohort.base.camera));
  for (const ScenarioConfig& c : trials) {
    const fs::path trial_dir = dir / c.trial_id;
    write_trial_files(simulate(c), c, trial_dir);
    m.trials.push_back(trial_record(c, trial_dir));
  }
  write_text(dir / "manifest.csv", format_manifest(m, dir));
}

}  // namespace legscreen
