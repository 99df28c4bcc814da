#include "rplace/controller.hpp"

#include "rplace/vision.hpp"

#include <cmath>
#include <set>

namespace rplace {

void ArrangementPlan::validate(const WorldState& world) const {
  std::set<std::string, std::less<>> seen;
  std::vector<CubeObject> targets;
  for (const auto& entry : entries) {
    if (!seen.insert(entry.object_id).second) {
      throw Error(ErrorCode::InvalidArgument, "object '" + entry.object_id + "' appears twice in the plan");
    }
    if (!world.has_cube(entry.object_id)) {
      throw Error(ErrorCode::ObjectNotFound, "plan refers to unknown object '" + entry.object_id + "'");
    }
    CubeObject target = world.any_cube(entry.object_id);
    target.pose = entry.desired_pose;
    for (const auto& corner : target.footprint()) {
      if (!world.table().contains(corner)) {
        throw Error(ErrorCode::OutOfBounds, "desired pose of '" + entry.object_id + "' leaves the table");
      }
    }
    for (const auto& other : targets) {
      if (convex_quads_overlap(target.footprint(), other.footprint())) {
        throw Error(ErrorCode::InvalidArgument,
                    "desired poses of '" + entry.object_id + "' and '" + other.id + "' overlap");
      }
    }
    targets.push_back(std::move(target));
  }
}

void CorrectionConfig::validate() const {
  if (!(threshold >= kMinThreshold) || !std::isfinite(threshold)) {
    throw Error(ErrorCode::InvalidArgument, "correction threshold must be >= 0.0005 m");
  }
  if (max_pushes < 1) throw Error(ErrorCode::InvalidArgument, "max_pushes must be >= 1");
}

std::string_view to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::converged: return "converged";
    case TerminalStatus::push_budget_exhausted: return "push_budget_exhausted";
    case TerminalStatus::failed: return "failed";
  }
  return "failed";
}

std::optional<TerminalStatus> parse_terminal_status(std::string_view name) {
  for (auto s : {TerminalStatus::converged, TerminalStatus::push_budget_exhausted, TerminalStatus::failed}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

PushCommand choose_push(const OffsetVec& offset, std::optional<PushAxis> last_axis, double threshold,
                        double max_distance) {
  if (!(offset.d_xy > 0.0)) throw Error(ErrorCode::InvalidArgument, "nothing to push: offset is zero");
  auto component = [&](PushAxis a) { return a == PushAxis::x ? offset.dx : offset.dy; };
  const PushAxis dominant = std::abs(offset.dx) >= std::abs(offset.dy) ? PushAxis::x : PushAxis::y;
  PushAxis axis = dominant;
  if (last_axis) {
    const PushAxis alternate = *last_axis == PushAxis::x ? PushAxis::y : PushAxis::x;
    axis = std::abs(component(alternate)) < threshold / 2.0 ? dominant : alternate;
  }
  const double distance = std::clamp(-component(axis), -max_distance, max_distance);
  return {axis, distance};
}

PlanarPose observe_pose(WorldState& world, const CameraModel& camera, std::string_view object_id,
                        std::optional<PlanarPose> expected) {
  const CubeObject& cube = world.cube(object_id);
  const ColorRange range = ColorRange::for_cube(cube.color);
  const double edge = cube.edge;
  const RgbImage image = render(world, camera);
  return estimate_object_world_pose(image, range, camera, edge, expected);
}

namespace {

CorrectionResult run_loop(std::string_view object_id, const PlanarPose& desired_pose, WorldState& world,
                          const CameraModel& camera, const CorrectionConfig& config, ObjectTrace& trace,
                          OffsetVec estimate) {
  std::optional<PushAxis> last_axis;
  int pushes = 0;
  int stalled = 0;
  while (estimate.d_xy >= config.threshold) {
    if (pushes >= config.max_pushes) {
      trace.terminal_status = TerminalStatus::push_budget_exhausted;
      return {estimate, pushes};
    }
    const PushCommand cmd = choose_push(estimate, last_axis, config.threshold, world.contact().max_push_distance);
    world.push(object_id, cmd.axis, cmd.signed_distance);
    ++pushes;
    last_axis = cmd.axis;
    const OffsetVec next = planar_offset(desired_pose, observe_pose(world, camera, object_id, desired_pose));
    trace.push_axes.push_back(cmd.axis);
    trace.offsets_after_each_push.push_back(planar_offset(desired_pose, world.cube(object_id).pose));
    trace.estimated_after_each_push.push_back(next);
    trace.push_count = pushes;
    stalled = next.d_xy < estimate.d_xy ? 0 : stalled + 1;
    estimate = next;
    if (stalled >= 3) throw Error(ErrorCode::CorrectionStalled, "offset did not decrease for 3 pushes");
  }
  trace.terminal_status = TerminalStatus::converged;
  return {estimate, pushes};
}

}  // namespace

CorrectionResult correction_loop(std::string_view object_id, const PlanarPose& desired_pose, WorldState& world,
                                 const CameraModel& camera, const CorrectionConfig& config, ObjectTrace& trace) {
  config.validate();
  const OffsetVec estimate = planar_offset(desired_pose, observe_pose(world, camera, object_id, desired_pose));
  return run_loop(object_id, desired_pose, world, camera, config, trace, estimate);
}

namespace {

void record_failure(ObjectTrace& trace, const Error& e) {
  trace.terminal_status = TerminalStatus::failed;
  trace.failure = e.code();
  trace.failure_message = e.what();
}

void place_phase(const PlanEntry& entry, WorldState& world, const CameraModel& camera, const ErrorSpec& pick_error,
                 ObjectTrace& trace) {
  const PlanarPose observed = observe_pose(world, camera, entry.object_id, std::nullopt);
  trace.injected_error = inject(world, entry.object_id, pick_error);
  world.pick(entry.object_id, observed);
  world.place(entry.desired_pose);
  trace.placed = true;
  trace.offset_after_place = planar_offset(entry.desired_pose, world.cube(entry.object_id).pose);
  trace.estimated_after_place =
      planar_offset(entry.desired_pose, observe_pose(world, camera, entry.object_id, entry.desired_pose));
}

}  // namespace

std::vector<ObjectTrace> run_arrangement(const ArrangementPlan& plan, WorldState& world, const CameraModel& camera,
                                         const CorrectionConfig& config, const ErrorSpec& pick_error) {
  config.validate();
  plan.validate(world);
  for (const auto& entry : plan.entries) pick_error.validate(world.any_cube(entry.object_id).edge);

  std::vector<ObjectTrace> traces(plan.entries.size());
  auto guarded = [&](ObjectTrace& trace, auto&& step) {
    try {
      step();
    } catch (const Error& e) {
      world.abort_hold();
      record_failure(trace, e);
    }
  };

  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const auto& entry = plan.entries[i];
    ObjectTrace& trace = traces[i];
    trace.object_id = entry.object_id;
    guarded(trace, [&] {
      place_phase(entry, world, camera, pick_error, trace);
      if (!config.defer_correction) {
        run_loop(entry.object_id, entry.desired_pose, world, camera, config, trace, trace.estimated_after_place);
      }
    });
  }
  if (config.defer_correction) {
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
      ObjectTrace& trace = traces[i];
      if (!trace.placed || trace.failure) continue;
      guarded(trace, [&] {
        correction_loop(plan.entries[i].object_id, plan.entries[i].desired_pose, world, camera, config, trace);
      });
    }
  }
  return traces;
}

}  // namespace rplace
