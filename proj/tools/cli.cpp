#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>

#include "legscreen/errors.hpp"
#include "legscreen/evaluation.hpp"
#include "legscreen/io.hpp"
#include "legscreen/manifest.hpp"
#include "legscreen/pipeline.hpp"
#include "legscreen/plot.hpp"
#include "legscreen/synth_oracle.hpp"

namespace legscreen {

namespace {

struct PipelineOptions {
  double min_confidence = kMinConfidence;
  std::string noise_axis = "viewing_ray";
  int start_frames = 3;
  std::string smoothing = "savitzky_golay";
  int window = 9;
  int poly_order = 3;
  double edge_trim = 1.0;
  std::string rule = "hysteresis";
  double hysteresis = 0.1;
  bool no_align = false;
  double max_lag = 2.0;

  PipelineConfig config() const {
    PipelineConfig c;
    c.min_confidence = min_confidence;
    c.noise_axis = noise_axis == "first_component" ? NoiseAxis::first_component
                   : noise_axis == "none"          ? NoiseAxis::none
                                                   : NoiseAxis::viewing_ray;
    c.start = start_frames <= 1 ? StartPolicy::first_sample() : StartPolicy::mean_first_n(start_frames);
    c.smoothing.method =
        smoothing == "moving_average" ? SmoothingMethod::moving_average : SmoothingMethod::savitzky_golay;
    c.smoothing.window = window;
    c.smoothing.poly_order = poly_order;
    c.smoothing.validate();
    c.edge_trim_s = edge_trim;
    c.reps.rule = rule == "zero_crossing" ? CrossingRule::zero_crossing : CrossingRule::hysteresis;
    c.reps.hysteresis_fraction = hysteresis;
    c.align = !no_align;
    c.max_lag_s = max_lag;
    return c;
  }
};

void add_pipeline_options(CLI::App* app, PipelineOptions& o, bool geometry, bool smoothing, bool scoring) {
  if (geometry) {
    app->add_option("--min-confidence", o.min_confidence, "Detections below this confidence are dropped")
        ->capture_default_str();
    app->add_option("--noise-axis", o.noise_axis, "Direction removed before measuring distance")
        ->check(CLI::IsMember({"viewing_ray", "first_component", "none"}))
        ->capture_default_str();
    app->add_option("--start-frames", o.start_frames, "Frames averaged for the start position (1: first frame)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
  if (smoothing) {
    app->add_option("--smoothing", o.smoothing, "Smoothing filter")
        ->check(CLI::IsMember({"savitzky_golay", "moving_average"}))
        ->capture_default_str();
    app->add_option("--window", o.window, "Smoothing window in samples (odd)")->capture_default_str();
    app->add_option("--poly-order", o.poly_order, "Savitzky-Golay polynomial order")->capture_default_str();
  }
  if (scoring) {
    app->add_option("--edge-trim", o.edge_trim, "Seconds ignored at each trial edge")->capture_default_str();
    app->add_option("--rule", o.rule, "Repetition crossing rule")
        ->check(CLI::IsMember({"hysteresis", "zero_crossing"}))
        ->capture_default_str();
    app->add_option("--hysteresis", o.hysteresis, "Minimum excursion between crossings, fraction of range")
        ->capture_default_str();
  }
}

void add_alignment_options(CLI::App* app, PipelineOptions& o) {
  app->add_flag("--no-align", o.no_align, "Assume camera and sensor clocks are synchronized");
  app->add_option("--max-lag", o.max_lag, "Clock-offset search range in seconds")->capture_default_str();
}

void write_svgs(const fs::path& dir, const ScenarioConfig& cfg, const InvertCheckReport& r) {
  const MotionModel model(cfg);
  const auto& grid = r.estimate.displacement.timestamps;
  std::vector<double> x_true, f_true;
  for (double t : grid) {
    x_true.push_back(model.displacement(t - cfg.camera_clock_offset_s));
    f_true.push_back(model.force(t - cfg.camera_clock_offset_s));
  }
  write_text(dir / "displacement.svg",
             svg_line_plot("Sled displacement", "time [s]", "displacement [m]",
                           {{"camera estimate", grid, r.estimate.displacement.displacement},
                            {"true", grid, x_true},
                            {"encoder", grid, r.sensors.measured_displacement}}));
  write_text(dir / "force.svg", svg_line_plot("Foot-plate force", "time [s]", "force [N]",
                                              {{"camera estimate", grid, r.estimate.force.force},
                                               {"true", grid, f_true},
                                               {"force plate", grid, r.sensors.measured_force}}));
}

void write_progress_svg(const fs::path& path, const ProgressSeries& s) {
  std::vector<double> weeks(s.weeks.begin(), s.weeks.end());
  std::vector<PlotSeries> series{{"reps (camera)", weeks, s.norm_reps_est},
                                 {"peak force (camera)", weeks, s.norm_peak_force_est}};
  const auto add_fit = [&](const std::string& label, const ProgressTrend& t) {
    std::vector<double> y;
    for (double w : weeks) y.push_back(t.intercept + t.slope * w);
    series.push_back({label, weeks, y});
  };
  add_fit("reps trend", s.reps_trend);
  add_fit("peak force trend", s.peak_force_trend);
  write_text(path, svg_line_plot("Normalized progress: " + s.subject_id, "week", "normalized value", series));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Leg-press screening from stereo keypoints: triangulation, displacement, force, "
               "repetitions, symmetry, evaluation against sensors and a closed-loop simulator.",
               "legscreen"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  PipelineOptions po;
  std::string keypoints, calibration, trajectory, displacement, params, output, manifest, report, dir, scenario;
  std::string joint = "hip", diagnostics, summary, svg_dir, leg = "right";
  int reps_right = 0, reps_left = 0, subjects = 4, weeks = 12;
  unsigned threads = 0;
  double load = 0.5, gain = 0.095;
  std::optional<std::uint64_t> seed;
  bool cohort = false;

  auto* tri = app.add_subcommand("triangulate", "Keypoint CSV -> 3D hip trajectory (y-regulation + DLT)");
  tri->add_option("--keypoints", keypoints, "Keypoint CSV (t_sec,view,joint,x_px,y_px,conf)")->required();
  tri->add_option("--calibration", calibration, "Calibration key/value file")->required();
  tri->add_option("--joint", joint, "Joint to triangulate")->capture_default_str();
  tri->add_option("--out", output, "Trajectory CSV (t_sec,X_m,Y_m,Z_m)")->required();
  add_pipeline_options(tri, po, true, false, false);

  auto* dsp = app.add_subcommand("displacement", "Trajectory CSV -> start-referenced displacement CSV");
  dsp->add_option("--trajectory", trajectory, "Trajectory CSV")->required();
  dsp->add_option("--out", output, "Displacement CSV (t_sec,disp_m)")->required();
  dsp->add_option("--diagnostics", diagnostics, "Write PCA eigenvalues and projection details here");
  add_pipeline_options(dsp, po, true, false, false);

  auto* frc = app.add_subcommand("force", "Displacement CSV + machine params -> foot-plate force CSV");
  frc->add_option("--displacement", displacement, "Displacement CSV from the displacement stage")->required();
  frc->add_option("--params", params, "Machine/patient parameter file")->required();
  frc->add_option("--out", output, "Force CSV (t_sec,force_N)")->required();
  add_pipeline_options(frc, po, false, true, false);

  auto* rep = app.add_subcommand("reps", "Displacement CSV -> repetition count (printed; optional CSV)");
  rep->add_option("--displacement", displacement, "Displacement CSV from the displacement stage")->required();
  rep->add_option("--out", output, "Crossing-time CSV with a '# count=' line");
  add_pipeline_options(rep, po, false, true, true);

  auto* sym = app.add_subcommand("symmetry", "Percent symmetry 100*min/max of right/left repetitions");
  sym->add_option("--reps-right", reps_right, "Right-leg repetitions")->required()->check(CLI::NonNegativeNumber);
  sym->add_option("--reps-left", reps_left, "Left-leg repetitions")->required()->check(CLI::NonNegativeNumber);

  auto* evl = app.add_subcommand("evaluate", "Run every manifest trial and score it against encoder/force plate");
  evl->add_option("--manifest", manifest, "Manifest CSV")->required();
  evl->add_option("--out", output, "Per-trial report CSV")->required();
  evl->add_option("--summary", summary, "Cohort summary-table CSV");
  evl->add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
  add_pipeline_options(evl, po, true, true, true);
  add_alignment_options(evl, po);

  auto* prg = app.add_subcommand("progress", "Per-subject normalized reps/peak-force trends across weeks");
  prg->add_option("--manifest", manifest, "Manifest CSV (subjects and weeks)")->required();
  prg->add_option("--report", report, "Report CSV written by evaluate")->required();
  prg->add_option("--out-dir", output, "Directory for progress_<subject>.csv and progress_cohort.csv")
      ->required();
  prg->add_option("--leg", leg, "Leg to track")->check(CLI::IsMember({"left", "right"}))->capture_default_str();
  prg->add_option("--load", load, "Load fraction to track")->capture_default_str();
  prg->add_option("--svg-dir", svg_dir, "Also write SVG trend plots here");

  auto* sim = app.add_subcommand("simulate", "Synthetic trial (or cohort) with known ground truth");
  sim->add_option("--scenario", scenario, "Scenario key/value file (defaults when omitted)");
  sim->add_option("--out", output, "Output directory")->required();
  sim->add_option("--seed", seed, "Override the scenario seed");
  sim->add_flag("--cohort", cohort, "Simulate a longitudinal cohort instead of one trial");
  sim->add_option("--subjects", subjects, "Cohort subjects")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--weeks", weeks, "Cohort weeks (2..12)")->check(CLI::Range(2, 12))->capture_default_str();
  sim->add_option("--gain", gain, "Cohort peak-force gain, first to last week")->capture_default_str();

  auto* inv = app.add_subcommand("invert-check", "Run the pipeline on a simulate directory and score it");
  inv->add_option("--dir", dir, "Directory written by simulate")->required();
  inv->add_option("--out", output, "Report CSV (default: <dir>/invert_check.csv)");
  inv->add_option("--svg-dir", svg_dir, "Also write displacement/force overlay SVGs here");
  add_pipeline_options(inv, po, true, true, true);
  add_alignment_options(inv, po);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (const auto subs = app.get_subcommands(); !subs.empty()) {
      err << "see: legscreen " << subs.front()->get_name() << " --help\n";
    } else {
      err << "see: legscreen --help\n";
    }
    return kExitUsage;
  }

  PipelineConfig cfg;
  try {
    cfg = po.config();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*tri) {
      const Trajectory3D traj = triangulate_stage(read_keypoints(keypoints, joint), read_calibration(calibration), cfg);
      write_text(output, format_trajectory(traj));
    } else if (*dsp) {
      DepthNoiseRemoval diag;
      const DisplacementSeries d = displacement_stage(read_trajectory(trajectory), cfg, &diag);
      write_text(output, format_displacement(d));
      if (!diagnostics.empty()) {
        std::string text;
        text += "collinear = " + std::string(diag.collinear ? "true" : "false") + "\n";
        for (int k = 0; k < 3; ++k)
          text += "eigenvalue_" + std::to_string(k + 1) + " = " + format_real(diag.axes.eigenvalues[k]) + "\n";
        if (diag.plane) {
          const Vec3& n = diag.plane->normal;
          text += "normal = " + format_real(n.x()) + "," + format_real(n.y()) + "," + format_real(n.z()) + "\n";
          text += "eigenvalue_tie = " + std::string(diag.plane->eigenvalue_tie ? "true" : "false") + "\n";
        }
        write_text(diagnostics, text);
      }
    } else if (*frc) {
      write_text(output, format_force(force_stage(read_displacement(displacement), read_params(params), cfg)));
    } else if (*rep) {
      const RepCount reps = reps_stage(read_displacement(displacement), cfg);
      if (!output.empty()) write_text(output, format_reps(reps));
      out << reps.count << "\n";
    } else if (*sym) {
      out << format_real(percent_symmetry(reps_right, reps_left).percent) << "\n";
    } else if (*evl) {
      const Manifest m = load_manifest(manifest);
      const Evaluation ev = evaluate_manifest(m, cfg, threads);
      for (const auto& s : ev.skipped)
        err << "skipped " << (s.trial_id.empty() ? "?" : s.trial_id) << " (" << manifest << ":" << s.line
            << "): " << s.reason << "\n";
      for (const auto& f : ev.failed) err << "excluded " << f.trial_id << ": " << f.reason << "\n";
      write_text(output, format_report(ev.rows));
      if (!summary.empty()) write_text(summary, format_summary(summarize(ev.rows)));
      out << ev.rows.size() << " trials evaluated, " << ev.skipped.size() + ev.failed.size() << " excluded\n";
      if (ev.rows.empty()) return kExitData;
    } else if (*prg) {
      const Manifest m = load_manifest(manifest);
      const auto subjects_progress = subject_progress(read_report(report), m, {parse_leg(leg), load});
      const ProgressSeries all = cohort_progress(subjects_progress);
      const fs::path dir_out(output);
      for (const ProgressSeries& s : subjects_progress) {
        write_text(dir_out / ("progress_" + s.subject_id + ".csv"), format_progress(s));
        if (!svg_dir.empty()) write_progress_svg(fs::path(svg_dir) / ("progress_" + s.subject_id + ".svg"), s);
      }
      write_text(dir_out / "progress_cohort.csv", format_progress(all));
      if (!svg_dir.empty()) write_progress_svg(fs::path(svg_dir) / "progress_cohort.svg", all);
      out << "peak force increase " << format_real(all.peak_force_trend.percent_increase) << " % (r2 "
          << format_real(all.peak_force_trend.r_squared) << "), reps increase "
          << format_real(all.reps_trend.percent_increase) << " % (r2 " << format_real(all.reps_trend.r_squared)
          << ")\n";
    } else if (*sim) {
      ScenarioConfig base = scenario.empty() ? ScenarioConfig{} : read_scenario(scenario);
      if (seed) base.seed = *seed;
      if (cohort) {
        CohortConfig cc;
        cc.subjects = subjects;
        cc.weeks = weeks;
        cc.peak_force_gain = gain;
        cc.seed = base.seed;
        cc.base = base;
        write_cohort(cc, output);
      } else {
        write_simulation(simulate(base), base, output);
      }
    } else if (*inv) {
      const fs::path d(dir);
      const InvertCheckReport r = invert_check_dir(d, cfg);
      const fs::path report_path = output.empty() ? d / "invert_check.csv" : fs::path(output);
      write_text(report_path, format_invert_check(r));
      if (!svg_dir.empty()) write_svgs(svg_dir, read_scenario(d / "scenario.cfg"), r);
      out << "reps " << r.estimate.reps.count << "/" << r.reps_true << ", displacement NRMSE "
          << format_real(r.displacement_vs_truth.nrmse_percent) << " %, force NRMSE "
          << format_real(r.force_vs_truth.nrmse_percent) << " %\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace legscreen
