#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "legscreen/evaluation.hpp"
#include "legscreen/io.hpp"
#include "legscreen/pipeline.hpp"
#include "legscreen/synth_oracle.hpp"
#include "test_support.hpp"

using namespace legscreen;
using testing_support::TempDir;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string p(const fs::path& path) { return path.string(); }

}  // namespace

TEST_CASE("symmetry prints the percentage") {
  const Run r = run({"symmetry", "--reps-right", "8", "--reps-left", "10"});
  CHECK(r.code == kExitOk);
  CHECK(r.out == "80.0\n");
  CHECK(run({"symmetry", "--reps-right", "7", "--reps-left", "7"}).out == "100.0\n");
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  const Run missing = run({"symmetry", "--reps-right", "8"});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("--reps-left") != std::string::npos);
  CHECK(run({"symmetry", "--reps-right", "x", "--reps-left", "1"}).code == kExitUsage);
  CHECK(run({"reps", "--displacement", "d.csv", "--window", "8"}).code == kExitUsage);
  CHECK(run({"displacement", "--trajectory", "t.csv", "--out", "o.csv", "--noise-axis", "sideways"}).code ==
        kExitUsage);
}

TEST_CASE("data errors exit with 2 and name the file") {
  TempDir dir("cli_err");
  const Run r = run({"reps", "--displacement", p(dir / "absent.csv")});
  CHECK(r.code == kExitData);
  CHECK(r.err.find(p(dir / "absent.csv")) != std::string::npos);

  write_text(dir / "bad.csv", "t_sec,disp_m\n0.0,0.0\n0.1,zz\n");
  const Run bad = run({"reps", "--displacement", p(dir / "bad.csv")});
  CHECK(bad.code == kExitData);
  CHECK(bad.err.find("bad.csv:3") != std::string::npos);

  CHECK(run({"symmetry", "--reps-right", "0", "--reps-left", "0"}).code == kExitData);
}

TEST_CASE("help exits cleanly") {
  const Run top = run({"--help"});
  CHECK(top.code == kExitOk);
  CHECK(top.out.find("invert-check") != std::string::npos);
  const Run sub = run({"evaluate", "--help"});
  CHECK(sub.code == kExitOk);
  CHECK(sub.out.find("--manifest") != std::string::npos);
}

TEST_CASE("staged commands reproduce the in-process pipeline byte for byte") {
  TempDir dir("cli_stages");
  const fs::path sim = dir / "sim";
  REQUIRE(run({"simulate", "--out", p(sim), "--seed", "11"}).code == kExitOk);

  REQUIRE(run({"triangulate", "--keypoints", p(sim / "keypoints.csv"), "--calibration", p(sim / "calibration.txt"),
               "--out", p(dir / "traj.csv")})
              .code == kExitOk);
  REQUIRE(run({"displacement", "--trajectory", p(dir / "traj.csv"), "--out", p(dir / "disp.csv"), "--diagnostics",
               p(dir / "diag.txt")})
              .code == kExitOk);
  REQUIRE(run({"force", "--displacement", p(dir / "disp.csv"), "--params", p(sim / "params.txt"), "--out",
               p(dir / "force.csv")})
              .code == kExitOk);
  const Run reps = run({"reps", "--displacement", p(dir / "disp.csv"), "--out", p(dir / "reps.csv")});
  REQUIRE(reps.code == kExitOk);

  const CameraEstimate est = estimate_trial(read_keypoints(sim / "keypoints.csv"),
                                            read_calibration(sim / "calibration.txt"), read_params(sim / "params.txt"));
  CHECK(read_text(dir / "traj.csv") == format_trajectory(est.trajectory));
  CHECK(read_text(dir / "disp.csv") == format_displacement(est.raw_displacement));
  CHECK(read_text(dir / "force.csv") == format_force(est.force));
  CHECK(read_text(dir / "reps.csv") == format_reps(est.reps));
  CHECK(reps.out == std::to_string(est.reps.count) + "\n");
  CHECK(read_text(dir / "diag.txt").find("eigenvalue_1 = ") != std::string::npos);

  const Run inv = run({"invert-check", "--dir", p(sim), "--svg-dir", p(dir / "svg")});
  REQUIRE(inv.code == kExitOk);
  CHECK(read_text(sim / "invert_check.csv") == format_invert_check(invert_check_dir(sim)));
  CHECK(read_text(dir / "svg" / "force.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("simulate is deterministic for a seed") {
  TempDir dir("cli_det");
  REQUIRE(run({"simulate", "--out", p(dir / "a"), "--seed", "3"}).code == kExitOk);
  REQUIRE(run({"simulate", "--out", p(dir / "b"), "--seed", "3"}).code == kExitOk);
  for (const char* name : {"keypoints.csv", "encoder.csv", "force_plate.csv", "scenario.cfg", "truth_force.csv"})
    CHECK(read_text(dir / "a" / name) == read_text(dir / "b" / name));
}

TEST_CASE("evaluate and progress over a small cohort") {
  TempDir dir("cli_cohort");
  const fs::path c = dir / "cohort";
  REQUIRE(run({"simulate", "--cohort", "--subjects", "1", "--weeks", "2", "--out", p(c), "--seed", "4"}).code ==
          kExitOk);
  // One unusable row is reported but does not stop the run.
  std::string manifest = read_text(c / "manifest.csv");
  manifest += "extra,S09,1,right,0.4,S01_W01_R_50/keypoints.csv,,,S01_W01_R_50/params.txt\n";
  write_text(c / "manifest.csv", manifest);

  const Run ev = run({"evaluate", "--manifest", p(c / "manifest.csv"), "--out", p(dir / "report.csv"), "--summary",
                      p(dir / "summary.csv")});
  REQUIRE(ev.code == kExitOk);
  CHECK(ev.err.find("skipped extra") != std::string::npos);
  CHECK(read_report(dir / "report.csv").size() == 8);
  CHECK(read_text(dir / "summary.csv").rfind("metric,value\ntrials,8\n", 0) == 0);

  const Run pr = run({"progress", "--manifest", p(c / "manifest.csv"), "--report", p(dir / "report.csv"), "--out-dir",
                      p(dir / "progress")});
  REQUIRE(pr.code == kExitOk);
  CHECK(fs::is_regular_file(dir / "progress" / "progress_S01.csv"));
  CHECK(fs::is_regular_file(dir / "progress" / "progress_cohort.csv"));

  // A manifest whose every trial fails produces no report rows.
  write_text(dir / "k.csv", "t_sec,view,joint,x_px,y_px,conf\n0.0,L,hip,1,1,1\n");
  write_text(dir / "p.txt", format_params({}));
  write_text(dir / "calibration.txt", format_calibration({}));
  write_text(dir / "broken.csv",
             "# calibration=calibration.txt\n# params=p.txt\n"
             "trial_id,subject_id,session_week,leg,load_fraction,keypoint_path,encoder_path,force_path\n"
             "x,S1,1,right,0.5,k.csv,,\n");
  const Run broken = run({"evaluate", "--manifest", p(dir / "broken.csv"), "--out", p(dir / "r2.csv")});
  CHECK(broken.code == kExitData);
  CHECK(broken.err.find("excluded x") != std::string::npos);
}
