#include "rplace/camera.hpp"
#include "rplace/config.hpp"
#include "rplace/controller.hpp"
#include "rplace/error.hpp"
#include "rplace/harness.hpp"
#include "rplace/vision.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace rplace;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  std::string debug_dir;
  std::string output_dir;
  bool from_stdin = false;
};

std::string mm(double meters) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", meters * 1000.0);
  return buf;
}

std::string phase_label(bool after_push) { return after_push ? "after pushing" : "after placing"; }

int run_experiment_command(const Options& opt) {
  RunPlan plan = load_run_plan(opt.config, opt.overrides);
  const unsigned jobs = opt.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.jobs;
  std::vector<TableRow> table;
  std::vector<BoxEntry> boxes;
  std::filesystem::path out_dir;
  std::string demo_lines;
  for (ExperimentConfig& cfg : plan.runs) {
    if (opt.seed) cfg.base_seed = *opt.seed;
    if (!opt.output_dir.empty()) cfg.output_dir = opt.output_dir;
    out_dir = cfg.output_dir;
    const ExperimentResult result = run_experiment(cfg, jobs);
    const std::string name = std::string(to_string(cfg.experiment)) + "_" + std::string(to_string(cfg.mode));
    export_csv(result.records, result.summary, cfg.output_dir / (name + ".csv"));
    if (result.summary.failed_trials > 0) {
      std::cout << name << ": " << result.summary.failed_trials << " of " << cfg.trials
                << " trials failed and are excluded from the statistics\n";
    }
    if (result.summary.after_place.n == 0) continue;
    for (bool pushed : {false, true}) {
      boxes.push_back({std::string(to_string(cfg.experiment)), std::string(to_string(cfg.mode)), phase_label(pushed),
                       pushed ? result.summary.after_push : result.summary.after_place});
    }
    if (cfg.experiment == ExperimentKind::arrangement_demo) {
      std::size_t within = 0;
      for (const auto& r : result.records) within += r.completed() && r.d_xy_after_push < cfg.correction.threshold;
      demo_lines += "arrangement_demo (" + std::string(to_string(cfg.mode)) + ", worst of " +
                    std::to_string(cfg.demo_layout.size()) + " cubes): after placing " +
                    mm(result.summary.after_place.mean) + " ± " + mm(result.summary.after_place.sample_std) +
                    " mm, after pushing " + mm(result.summary.after_push.mean) + " ± " +
                    mm(result.summary.after_push.sample_std) + " mm, all cubes below threshold in " +
                    std::to_string(within) + "/" + std::to_string(cfg.trials) + " trials\n";
    } else {
      table.push_back({cfg.experiment, cfg.mode, result.summary});
    }
  }
  if (!boxes.empty()) export_boxplot_svg(boxes, out_dir / "boxplot.svg");
  if (!table.empty()) std::cout << format_summary_table(table);
  std::cout << demo_lines;
  return kExitOk;
}

void print_trace(const ObjectTrace& t) {
  std::cout << t.object_id << ": status " << to_string(t.terminal_status);
  if (t.failure) std::cout << " (" << to_string(*t.failure) << ": " << t.failure_message << ")";
  std::cout << "\n  injected dx " << mm(t.injected_error.dx) << " mm, dy " << mm(t.injected_error.dy) << " mm, dyaw "
            << mm(rad_to_deg(t.injected_error.dyaw) / 1000.0) << " deg\n";
  if (!t.placed) return;
  std::cout << "  after placing: " << mm(t.offset_after_place.d_xy) << " mm (seen "
            << mm(t.estimated_after_place.d_xy) << " mm)\n";
  for (std::size_t k = 0; k < t.offsets_after_each_push.size(); ++k) {
    std::cout << "  push " << k + 1 << " along " << to_string(t.push_axes[k]) << ": "
              << mm(t.offsets_after_each_push[k].d_xy) << " mm (seen " << mm(t.estimated_after_each_push[k].d_xy)
              << " mm)\n";
  }
  std::cout << "  final: " << mm(t.final_offset().d_xy) << " mm after " << t.push_count << " pushes\n";
}

WorldState scenario_world(const Scenario& s, std::uint64_t seed) {
  WorldState world(s.table, s.noise, seed, s.gripper, s.contact);
  for (const auto& c : s.cubes) world.add_cube(CubeObject{c.id, c.color, s.cube_edge, c.start});
  return world;
}

int run_arrangement_command(const Options& opt) {
  Scenario s = load_scenario(opt.config, opt.overrides);
  const std::uint64_t seed = opt.seed.value_or(s.seed);
  WorldState world = scenario_world(s, seed);
  ArrangementPlan plan;
  for (const auto& c : s.cubes) plan.entries.push_back({c.id, c.target});
  if (!opt.debug_dir.empty()) {
    std::filesystem::create_directories(opt.debug_dir);
    write_ppm(render(world, s.camera), std::filesystem::path(opt.debug_dir) / "before.ppm");
  }
  const auto traces = run_arrangement(plan, world, s.camera, s.correction, s.pick_error);
  if (!opt.debug_dir.empty()) write_ppm(render(world, s.camera), std::filesystem::path(opt.debug_dir) / "after.ppm");
  for (const auto& t : traces) print_trace(t);
  return kExitOk;
}

int render_debug_command(const Options& opt) {
  if (opt.debug_dir.empty()) throw Error(ErrorCode::ConfigError, "render-debug needs --debug-dir");
  const std::string text = read_text_file(opt.config);
  Scenario s;
  if (is_scenario_document(text)) {
    s = parse_scenario(text, opt.overrides, opt.config);
  } else {
    const RunPlan plan = parse_run_plan(text, opt.overrides, opt.config);
    const ExperimentConfig& cfg = plan.runs.front();
    s.mode = cfg.mode;
    s.seed = cfg.base_seed;
    s.noise = cfg.noise;
    s.camera = cfg.camera;
    s.table = cfg.table;
    s.gripper = cfg.gripper;
    s.contact = cfg.contact;
    s.cube_edge = cfg.cube_edge;
    if (cfg.experiment == ExperimentKind::arrangement_demo) {
      s.cubes = cfg.demo_layout;
    } else {
      s.cubes = {{"cube", cfg.cube_color, cfg.start_pose, cfg.target_pose}};
    }
  }
  const std::uint64_t seed = opt.seed.value_or(s.seed);
  WorldState world = scenario_world(s, seed);
  const std::filesystem::path dir(opt.debug_dir);
  std::filesystem::create_directories(dir);
  const RgbImage frame = render(world, s.camera);
  write_ppm(frame, dir / "frame.ppm");
  std::cout << "frame: " << (dir / "frame.ppm").string() << '\n';
  for (const auto& c : s.cubes) {
    VisionDebug debug;
    const PlanarPose truth = world.cube(c.id).pose;
    try {
      const PlanarPose est =
          estimate_object_world_pose(frame, ColorRange::for_cube(c.color), s.camera, s.cube_edge, truth, &debug);
      std::cout << c.id << ": true (" << mm(truth.x) << ", " << mm(truth.y) << ") mm, estimated (" << mm(est.x) << ", "
                << mm(est.y) << ") mm, error " << mm(planar_offset(truth, est).d_xy) << " mm\n";
    } catch (const Error& e) {
      std::cout << c.id << ": " << to_string(e.code()) << ": " << e.what() << '\n';
    }
    if (debug.raw_mask.width() > 0) {
      write_pbm(debug.raw_mask, dir / (c.id + "_mask_raw.pbm"));
      write_pbm(debug.clean_mask, dir / (c.id + "_mask_clean.pbm"));
      write_corners(debug.corners, dir / (c.id + "_corners.txt"));
    }
  }
  return kExitOk;
}

int validate_config_command(const Options& opt) {
  std::string text;
  std::string source;
  if (opt.from_stdin) {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    source = "<stdin>";
  } else {
    text = read_text_file(opt.config);
    source = opt.config;
  }
  if (is_scenario_document(text)) {
    const Scenario s = parse_scenario(text, opt.overrides, source);
    std::cout << "ok: scenario with " << s.cubes.size() << " cubes\n";
  } else {
    const RunPlan plan = parse_run_plan(text, opt.overrides, source);
    std::cout << "ok: " << plan.runs.size() << " experiment run(s)\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pick-and-place with vision-based push correction: simulator, experiments, debugging"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* config = cmd->add_option("--config", opt.config, "Config or scenario file (YAML)");
    if (config_required) config->required()->check(CLI::ExistingFile);
    cmd->add_option("--set", opt.overrides, "Override a config value, dotted.key=value (repeatable)");
    cmd->add_option("--seed", opt.seed, "Base seed override");
  };

  auto* run_exp = app.add_subcommand("run-experiment", "Run Monte Carlo experiments, write CSV and SVG");
  add_common(run_exp, true);
  run_exp->add_option("--jobs", opt.jobs, "Worker threads (default: available cores)");
  run_exp->add_option("--output-dir", opt.output_dir, "Output directory (overrides output_dir)");

  auto* run_arr = app.add_subcommand("run-arrangement", "Run a scenario file and print per-object traces");
  add_common(run_arr, true);
  run_arr->add_option("--debug-dir", opt.debug_dir, "Write before/after frames here");

  auto* debug = app.add_subcommand("render-debug", "Dump a rendered frame and vision intermediates");
  add_common(debug, true);
  debug->add_option("--debug-dir", opt.debug_dir, "Output directory for the dumps")->required();

  auto* validate = app.add_subcommand("validate-config", "Check a config or scenario file");
  add_common(validate, false);
  validate->add_flag("--stdin", opt.from_stdin, "Read the document from standard input");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand(validate) && !opt.from_stdin && opt.config.empty()) {
      throw Error(ErrorCode::ConfigError, "validate-config needs --config or --stdin");
    }
    if (app.got_subcommand(run_exp)) return run_experiment_command(opt);
    if (app.got_subcommand(run_arr)) return run_arrangement_command(opt);
    if (app.got_subcommand(debug)) return render_debug_command(opt);
    return validate_config_command(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
