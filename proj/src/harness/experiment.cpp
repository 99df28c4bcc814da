#include "rplace/error.hpp"
#include "rplace/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace rplace {

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::nominal: return "nominal";
    case ExperimentKind::translation: return "translation";
    case ExperimentKind::orientation: return "orientation";
    case ExperimentKind::estimator_proxy: return "estimator_proxy";
    case ExperimentKind::arrangement_demo: return "arrangement_demo";
  }
  return "nominal";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (auto k : {ExperimentKind::nominal, ExperimentKind::translation, ExperimentKind::orientation,
                 ExperimentKind::estimator_proxy, ExperimentKind::arrangement_demo}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

InjectionKind injection_for(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::nominal: return InjectionKind::none;
    case ExperimentKind::translation: return InjectionKind::translation;
    case ExperimentKind::orientation: return InjectionKind::orientation;
    case ExperimentKind::estimator_proxy:
    case ExperimentKind::arrangement_demo: return InjectionKind::estimator_proxy;
  }
  return InjectionKind::none;
}

std::vector<DemoCube> default_demo_layout() {
  return {
      {"red", CubeColor::red, PlanarPose(-0.30, 0.06, 0.20), PlanarPose(0.12, 0.06, 0.0)},
      {"green", CubeColor::green, PlanarPose(-0.18, 0.06, -0.35), PlanarPose(0.24, 0.06, 0.0)},
      {"blue", CubeColor::blue, PlanarPose(-0.30, -0.06, 0.50), PlanarPose(0.12, -0.06, 0.0)},
      {"yellow", CubeColor::yellow, PlanarPose(-0.18, -0.06, -0.10), PlanarPose(0.24, -0.06, 0.0)},
  };
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  noise.validate();
  correction.validate();
  camera.validate();
  gripper.validate();
  if (!(table.x_min < table.x_max && table.y_min < table.y_max)) {
    throw Error(ErrorCode::InvalidArgument, "table bounds are empty");
  }
  if (!(cube_edge > 0.0)) throw Error(ErrorCode::InvalidArgument, "cube edge must be positive");
  ErrorSpec spec = pick_error;
  spec.kind = injection_for(experiment);
  spec.validate(cube_edge);
  if (experiment == ExperimentKind::arrangement_demo) {
    if (demo_layout.empty()) throw Error(ErrorCode::InvalidArgument, "arrangement demo needs at least one cube");
    std::vector<std::string_view> colors;
    for (const auto& c : demo_layout) {
      if (std::find(colors.begin(), colors.end(), to_string(c.color)) != colors.end()) {
        throw Error(ErrorCode::InvalidArgument, "arrangement demo cubes need distinct colors");
      }
      colors.push_back(to_string(c.color));
    }
  }
}

namespace {

WorldState make_world(const ExperimentConfig& cfg, std::uint64_t seed) {
  return WorldState(cfg.table, cfg.noise, seed, cfg.gripper, cfg.contact);
}

TerminalStatus worst(TerminalStatus a, TerminalStatus b) {
  auto rank = [](TerminalStatus s) {
    switch (s) {
      case TerminalStatus::converged: return 0;
      case TerminalStatus::push_budget_exhausted: return 1;
      case TerminalStatus::failed: return 2;
    }
    return 2;
  };
  return rank(a) >= rank(b) ? a : b;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, int trial_index) {
  TrialRecord record;
  record.trial_index = trial_index;
  record.seed = cfg.base_seed + static_cast<std::uint64_t>(trial_index);
  WorldState world = make_world(cfg, record.seed);
  ErrorSpec spec = cfg.pick_error;
  spec.kind = injection_for(cfg.experiment);

  ArrangementPlan plan;
  CorrectionConfig correction = cfg.correction;
  if (cfg.experiment == ExperimentKind::arrangement_demo) {
    correction.defer_correction = true;
    for (const auto& c : cfg.demo_layout) {
      world.add_cube(CubeObject{c.id, c.color, cfg.cube_edge, c.start});
      plan.entries.push_back({c.id, c.target});
    }
  } else {
    world.add_cube(CubeObject{"cube", cfg.cube_color, cfg.cube_edge, cfg.start_pose});
    plan.entries.push_back({"cube", cfg.target_pose});
  }

  const std::vector<ObjectTrace> traces = run_arrangement(plan, world, cfg.camera, correction, spec);
  // Multi-object trials report their worst object.
  record.status = TerminalStatus::converged;
  double worst_final = -1.0;
  for (const auto& t : traces) {
    record.status = worst(record.status, t.terminal_status);
    record.d_xy_after_place = std::max(record.d_xy_after_place, t.offset_after_place.d_xy);
    record.push_count += t.push_count;
    if (t.final_offset().d_xy > worst_final) {
      worst_final = t.final_offset().d_xy;
      record.injected = t.injected_error;
    }
  }
  record.d_xy_after_push = std::max(worst_final, 0.0);
  return record;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs) {
  cfg.validate();
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cfg.trials));

  ExperimentResult result;
  result.records.resize(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= cfg.trials) return;
      try {
        result.records[static_cast<std::size_t>(i)] = run_trial(cfg, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = cfg.trials;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  if (std::any_of(result.records.begin(), result.records.end(), [](const auto& r) { return r.completed(); })) {
    result.summary = summarize(result.records);
  } else {
    result.summary.failed_trials = result.records.size();
  }
  return result;
}

}  // namespace rplace
