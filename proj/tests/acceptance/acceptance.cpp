// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is the number of failed criteria.

#include "oracles/oracles.hpp"
#include "rplace/camera.hpp"
#include "rplace/controller.hpp"
#include "rplace/harness.hpp"
#include "rplace/vision.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>

using namespace rplace;
namespace fs = std::filesystem;

namespace {

// Criterion 1
constexpr int kZeroNoiseSeeds = 100;
constexpr double kZeroNoiseFinalMax = 0.1e-3;
constexpr double kZeroNoiseSeconds = 5.0;
// Criterion 2
constexpr int kRoundTripPoses = 1000;
constexpr double kRoundTripShift = 0.025;
constexpr double kRoundTripRotDeg = 40.0;
constexpr double kRoundTripMeanMax = 0.5e-3;
constexpr double kRoundTripMaxMax = 1.5e-3;
constexpr double kRoundTripYawMeanDeg = 0.5;
constexpr double kRoundTripSeconds = 60.0;
// Criterion 3
constexpr int kOracleRasters = 500;
constexpr int kJacobianPoses = 100;
constexpr double kJacobianRelTol = 1e-4;
constexpr double kFiniteDifferenceStep = 1e-6;
constexpr int kLmCases = 1000;
constexpr double kLmCornerNoisePx = 0.5;
constexpr double kLmStrictFraction = 0.99;
// Criterion 4
constexpr int kTrendTrials = 1000;
constexpr double kSimTranslationLo = 5e-3, kSimTranslationHi = 15e-3;
constexpr double kSimOrientationLo = 1e-3, kSimOrientationHi = 6e-3;
constexpr double kSimAfterPushMax = 1.0e-3;
constexpr double kSimSeconds = 300.0;
// Criterion 5
constexpr double kRealReductionMin = 0.70;
constexpr double kRealPushesLo = 1.0, kRealPushesHi = 3.0;
constexpr double kRealAfterPushMax = 1.5e-3;
// Criterion 6
constexpr int kDemoSeeds = 100;
constexpr int kDemoSuccessMin = 95;
constexpr double kDemoFinalMax = 1.0e-3;
// Criterion 7
constexpr int kDeterminismTrials = 40;
constexpr unsigned kDeterminismJobs = 4;
// Criterion 8
constexpr int kHalfNormalSamples = 10000;
constexpr double kHalfNormalRelTol = 0.02;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string mm(double meters) { return fmt("%.3f", meters * 1000.0) + " mm"; }

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

ExperimentConfig config(ExperimentKind kind, NoiseMode mode, int trials, const fs::path& out) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  cfg.mode = mode;
  cfg.noise = NoiseProfile::preset(mode);
  cfg.trials = trials;
  cfg.base_seed = 1;
  cfg.output_dir = out;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

BinaryMask random_mask(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 64);
  const int w = dim(rng), h = dim(rng);
  BinaryMask m(w, h);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = 0.2 + 0.6 * u(rng);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, u(rng) < density);
  }
  std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1);
  for (int k = 0; k < 3; ++k) {
    const int x0 = px(rng), y0 = py(rng);
    const int x1 = std::min(w - 1, x0 + px(rng) / 2), y1 = std::min(h - 1, y0 + py(rng) / 2);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) m.set(x, y, true);
    }
  }
  return m;
}

void zero_noise_end_to_end(unsigned jobs, const fs::path& out) {
  const auto t0 = Clock::now();
  auto cfg = config(ExperimentKind::nominal, NoiseMode::sim, kZeroNoiseSeeds, out);
  cfg.noise = NoiseProfile::zero(NoiseMode::sim);
  const auto result = run_experiment(cfg, jobs);
  const double elapsed = seconds_since(t0);
  int ok = 0;
  double worst = 0.0;
  for (const auto& r : result.records) {
    ok += r.completed() && r.push_count == 0 && r.d_xy_after_push < kZeroNoiseFinalMax;
    worst = std::max(worst, r.d_xy_after_push);
  }
  report(1, "zero-noise end-to-end", ok == kZeroNoiseSeeds && elapsed < kZeroNoiseSeconds,
         std::to_string(ok) + "/" + std::to_string(kZeroNoiseSeeds) + " seeds with 0 pushes and final < " +
             mm(kZeroNoiseFinalMax) + " (worst " + mm(worst) + "), " + fmt("%.2f", elapsed) + " s < " +
             fmt("%.0f", kZeroNoiseSeconds) + " s");
}

void vision_round_trip() {
  const auto t0 = Clock::now();
  const CameraModel cam = CameraModel::top_down();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> shift(-kRoundTripShift, kRoundTripShift);
  std::uniform_real_distribution<double> rot(-deg_to_rad(kRoundTripRotDeg), deg_to_rad(kRoundTripRotDeg));
  double sum = 0.0, worst = 0.0, yaw_sum = 0.0;
  int detected = 0;
  for (int i = 0; i < kRoundTripPoses; ++i) {
    const PlanarPose truth(shift(rng), shift(rng), rot(rng));
    WorldState w(TableBounds{}, NoiseProfile::zero(), 1);
    w.add_cube(CubeObject{"a", CubeColor::red, 0.05, truth});
    try {
      const auto est = estimate_object_world_pose(render(w, cam), ColorRange::for_cube(CubeColor::red), cam, 0.05);
      const double err = planar_offset(truth, est).d_xy;
      sum += err;
      worst = std::max(worst, err);
      yaw_sum += std::abs(rad_to_deg(wrap_symmetric(est.yaw - truth.yaw, kPi / 2.0)));
      ++detected;
    } catch (const Error&) {
      worst = std::numeric_limits<double>::infinity();
    }
  }
  const double elapsed = seconds_since(t0);
  const double mean = sum / std::max(detected, 1);
  const double yaw_mean = yaw_sum / std::max(detected, 1);
  report(2, "vision round trip",
         detected == kRoundTripPoses && mean < kRoundTripMeanMax && worst < kRoundTripMaxMax &&
             yaw_mean < kRoundTripYawMeanDeg && elapsed < kRoundTripSeconds,
         std::to_string(kRoundTripPoses) + " poses, mean " + mm(mean) + " < " + mm(kRoundTripMeanMax) + ", max " +
             mm(worst) + " < " + mm(kRoundTripMaxMax) + ", yaw mean " + fmt("%.4f", yaw_mean) + " deg < " +
             fmt("%.1f", kRoundTripYawMeanDeg) + " deg, " + fmt("%.1f", elapsed) + " s < " +
             fmt("%.0f", kRoundTripSeconds) + " s");
}

void oracle_equivalence() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> eps(0.3, 6.0);
  int morph_ok = 0, contour_ok = 0, simplify_ok = 0;
  for (int i = 0; i < kOracleRasters; ++i) {
    const BinaryMask m = random_mask(rng);
    morph_ok += morph_cleanup(m) == oracle::cleanup(m);

    std::vector<std::set<PixelCoord>> got;
    const auto contours = trace_contours(m);
    for (const auto& c : contours) {
      if (!c.hole) got.emplace_back(c.points.begin(), c.points.end());
    }
    auto want = oracle::outer_borders(m);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    contour_ok += got == want;

    // One closed polyline per raster: its largest traced border.
    const Contour* largest = nullptr;
    for (const auto& c : contours) {
      if (!largest || c.points.size() > largest->points.size()) largest = &c;
    }
    if (!largest || largest->points.size() < 3) {
      std::vector<Vec2> walk;
      for (int k = 0; k < 20; ++k) walk.emplace_back(k, (k * 7919 + i) % 5);
      const double e = eps(rng);
      simplify_ok += simplify_polyline(walk, e, false) == oracle::douglas_peucker(walk, e, false);
      continue;
    }
    std::vector<Vec2> pts;
    for (const auto& p : largest->points) pts.emplace_back(p.x, p.y);
    const double e = eps(rng);
    simplify_ok += simplify(*largest, e) == oracle::douglas_peucker(pts, e, largest->closed);
  }

  const CameraModel cam = CameraModel::top_down();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_pose = [&] {
    const Eigen::Vector3d tilt(0.15 * u(rng), 0.15 * u(rng), 1e-9);
    const RigidTransform3 base =
        compose(invert(cam.extrinsic), RigidTransform3::from_planar({0.03 * u(rng), 0.03 * u(rng), 0.7 * u(rng)}));
    return RigidTransform3(Eigen::AngleAxisd(tilt.norm(), tilt.normalized()).toRotationMatrix() * base.rotation(),
                           base.translation());
  };
  double worst_rel = 0.0;
  for (int i = 0; i < kJacobianPoses; ++i) {
    const auto pose = random_pose();
    CornerSet corners;
    corners.corners = oracle::project_face(random_pose(), cam, 0.05);
    const auto analytic = reprojection_jacobian(pose, cam, 0.05);
    const auto numeric = oracle::numeric_jacobian(pose, corners, cam, 0.05, kFiniteDifferenceStep);
    worst_rel = std::max(worst_rel, (analytic - numeric).cwiseAbs().maxCoeff() / numeric.cwiseAbs().maxCoeff());
  }

  std::normal_distribution<double> noise(0.0, kLmCornerNoisePx);
  int strictly_better = 0, never_worse = 0;
  for (int i = 0; i < kLmCases; ++i) {
    CornerSet c;
    c.corners = oracle::project_face(random_pose(), cam, 0.05);
    for (auto& p : c.corners) p += Vec2(noise(rng), noise(rng));
    const auto report = refine_pose_lm_report(estimate_pose_dlt(c, cam, 0.05), c, cam, 0.05);
    strictly_better += report.final_rms < report.initial_rms;
    never_worse += report.final_rms <= report.initial_rms;
  }
  const bool pass = morph_ok == kOracleRasters && contour_ok == kOracleRasters && simplify_ok == kOracleRasters &&
                    worst_rel < kJacobianRelTol && never_worse == kLmCases &&
                    strictly_better >= kLmStrictFraction * kLmCases;
  report(3, "oracle equivalence", pass,
         "morphology " + std::to_string(morph_ok) + "/" + std::to_string(kOracleRasters) + ", outer contours " +
             std::to_string(contour_ok) + "/" + std::to_string(kOracleRasters) + ", simplify " +
             std::to_string(simplify_ok) + "/" + std::to_string(kOracleRasters) + ", Jacobian max rel dev " +
             fmt("%.2e", worst_rel) + " < " + fmt("%.0e", kJacobianRelTol) + ", LM < DLT in " +
             std::to_string(strictly_better) + "/" + std::to_string(kLmCases) + " (>= " +
             fmt("%.0f", kLmStrictFraction * 100.0) + "%)");
}

std::map<ExperimentKind, ExperimentSummary> run_table(NoiseMode mode, unsigned jobs, const fs::path& out,
                                                      std::vector<BoxEntry>& boxes) {
  std::map<ExperimentKind, ExperimentSummary> out_summaries;
  for (auto kind : kTableExperiments) {
    const auto cfg = config(kind, mode, kTrendTrials, out);
    const auto r = run_experiment(cfg, jobs);
    export_csv(r.records, r.summary,
               out / (std::string(to_string(kind)) + "_" + std::string(to_string(mode)) + ".csv"));
    out_summaries[kind] = r.summary;
    if (r.summary.after_place.n > 0) {
      boxes.push_back({std::string(to_string(kind)), std::string(to_string(mode)), "after placing", r.summary.after_place});
      boxes.push_back({std::string(to_string(kind)), std::string(to_string(mode)), "after pushing", r.summary.after_push});
    }
  }
  return out_summaries;
}

void sim_trends(unsigned jobs, const fs::path& out, std::vector<BoxEntry>& boxes) {
  const auto t0 = Clock::now();
  const auto s = run_table(NoiseMode::sim, jobs, out, boxes);
  const double elapsed = seconds_since(t0);
  const double tr = s.at(ExperimentKind::translation).after_place.mean;
  const double orient = s.at(ExperimentKind::orientation).after_place.mean;
  double worst_push = 0.0;
  std::string pushes;
  for (auto kind : kTableExperiments) {
    worst_push = std::max(worst_push, s.at(kind).after_push.mean);
    pushes += std::string(pushes.empty() ? "" : ", ") + std::string(to_string(kind)) + " " + mm(s.at(kind).after_push.mean);
  }
  const bool pass = tr >= kSimTranslationLo && tr <= kSimTranslationHi && orient >= kSimOrientationLo &&
                    orient <= kSimOrientationHi && worst_push < kSimAfterPushMax && elapsed < kSimSeconds;
  report(4, "sim trends", pass,
         "translation after placing " + mm(tr) + " in [5, 15] mm, orientation after placing " + mm(orient) +
             " in [1, 6] mm, after pushing (" + pushes + ") < " + mm(kSimAfterPushMax) + ", " +
             fmt("%.0f", elapsed) + " s < " + fmt("%.0f", kSimSeconds) + " s");
}

void real_trends(unsigned jobs, const fs::path& out, std::vector<BoxEntry>& boxes) {
  const auto s = run_table(NoiseMode::real, jobs, out, boxes);
  const auto& nominal = s.at(ExperimentKind::nominal);
  const double reduction = 1.0 - nominal.after_push.mean / nominal.after_place.mean;
  const double tr = s.at(ExperimentKind::translation).after_place.mean;
  const double px = s.at(ExperimentKind::estimator_proxy).after_place.mean;
  const double orient = s.at(ExperimentKind::orientation).after_place.mean;
  const double nom = nominal.after_place.mean;
  const bool ordered = tr >= px && px > orient && orient > nom;
  double worst_push = 0.0;
  for (auto kind : kTableExperiments) worst_push = std::max(worst_push, s.at(kind).after_push.mean);
  const bool pass = reduction >= kRealReductionMin && nominal.mean_push_count >= kRealPushesLo &&
                    nominal.mean_push_count <= kRealPushesHi && ordered && worst_push < kRealAfterPushMax;
  report(5, "real trends", pass,
         "nominal reduction " + fmt("%.1f", reduction * 100.0) + "% >= 70%, nominal pushes " +
             fmt("%.2f", nominal.mean_push_count) + " in [1, 3], after placing translation " + mm(tr) +
             " >= proxy " + mm(px) + " > orientation " + mm(orient) + " > nominal " + mm(nom) +
             ", worst after pushing " + mm(worst_push) + " < " + mm(kRealAfterPushMax));
}

void arrangement_demo(unsigned jobs, const fs::path& out) {
  const auto cfg = config(ExperimentKind::arrangement_demo, NoiseMode::sim, kDemoSeeds, out);
  const auto r = run_experiment(cfg, jobs);
  int ok = 0;
  for (const auto& rec : r.records) ok += rec.completed() && rec.d_xy_after_push < kDemoFinalMax;
  report(6, "four-cube arrangement", ok >= kDemoSuccessMin,
         std::to_string(ok) + "/" + std::to_string(kDemoSeeds) + " seeds with all 4 cubes < " + mm(kDemoFinalMax) +
             " (need >= " + std::to_string(kDemoSuccessMin) + "), failed trials " +
             std::to_string(r.summary.failed_trials));
}

void determinism(const fs::path& out) {
  auto run_into = [&](const fs::path& dir, unsigned jobs) {
    std::vector<BoxEntry> boxes;
    for (auto [kind, mode] : {std::pair{ExperimentKind::translation, NoiseMode::real},
                              std::pair{ExperimentKind::estimator_proxy, NoiseMode::sim}}) {
      const auto cfg = config(kind, mode, kDeterminismTrials, dir);
      const auto r = run_experiment(cfg, jobs);
      const std::string name = std::string(to_string(kind)) + "_" + std::string(to_string(mode));
      export_csv(r.records, r.summary, dir / (name + ".csv"));
      boxes.push_back({std::string(to_string(kind)), std::string(to_string(mode)), "after placing", r.summary.after_place});
      boxes.push_back({std::string(to_string(kind)), std::string(to_string(mode)), "after pushing", r.summary.after_push});
    }
    export_boxplot_svg(boxes, dir / "boxplot.svg");
  };
  fs::remove_all(out);
  run_into(out / "serial", 1);
  run_into(out / "rerun", 1);
  run_into(out / "parallel", kDeterminismJobs);
  int files = 0, identical = 0;
  for (const auto& entry : fs::directory_iterator(out / "serial")) {
    const auto name = entry.path().filename();
    ++files;
    const std::string a = slurp(entry.path());
    identical += a == slurp(out / "rerun" / name) && a == slurp(out / "parallel" / name);
  }
  report(7, "determinism", files == 5 && identical == files,
         std::to_string(identical) + "/" + std::to_string(files) +
             " CSV/SVG files byte-identical across rerun and --jobs " + std::to_string(kDeterminismJobs));
}

void half_normal_statistics() {
  std::mt19937_64 rng(8);
  const double sigma = 0.002;
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<double> v(kHalfNormalSamples);
  for (auto& x : v) x = std::abs(n(rng));
  const auto s = describe(v);
  const double mean_dev = std::abs(s.mean / oracle::half_normal_mean(sigma) - 1.0);
  const double std_dev = std::abs(s.sample_std / oracle::half_normal_std(sigma) - 1.0);
  report(8, "half-normal moments", mean_dev < kHalfNormalRelTol && std_dev < kHalfNormalRelTol,
         "n=" + std::to_string(kHalfNormalSamples) + ", mean off by " + fmt("%.2f", mean_dev * 100.0) +
             "%, std off by " + fmt("%.2f", std_dev * 100.0) + "% (tolerance " +
             fmt("%.0f", kHalfNormalRelTol * 100.0) + "%)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  unsigned jobs = 1;
  std::string work_dir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--jobs", jobs, "Worker threads for Monte Carlo runs");
  app.add_option("--work-dir", work_dir, "Directory for generated CSV/SVG files");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const fs::path out(work_dir);
  fs::create_directories(out);
  auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  std::vector<BoxEntry> boxes;
  const std::vector<std::pair<int, std::function<void()>>> criteria = {
      {1, [&] { zero_noise_end_to_end(jobs, out / "zero_noise"); }},
      {2, [&] { vision_round_trip(); }},
      {3, [&] { oracle_equivalence(); }},
      {4, [&] { sim_trends(jobs, out / "trends", boxes); }},
      {5, [&] { real_trends(jobs, out / "trends", boxes); }},
      {6, [&] { arrangement_demo(jobs, out / "demo"); }},
      {7, [&] { determinism(out / "determinism"); }},
      {8, [&] { half_normal_statistics(); }},
  };
  for (const auto& [id, run] : criteria) {
    if (!wanted(id)) continue;
    try {
      run();
    } catch (const std::exception& e) {
      report(id, "aborted", false, e.what());
    }
  }
  if (!boxes.empty()) export_boxplot_svg(boxes, out / "trends" / "boxplot.svg");
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
