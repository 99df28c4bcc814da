#pragma once

#include "rplace/camera.hpp"
#include "rplace/error.hpp"
#include "rplace/geometry.hpp"
#include "rplace/injection.hpp"
#include "rplace/world.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rplace {

struct PlanEntry {
  std::string object_id;
  PlanarPose desired_pose;
};

struct ArrangementPlan {
  std::vector<PlanEntry> entries;

  /// Ids unique and present in `world`; desired footprints inside the table and
  /// pairwise disjoint.
  void validate(const WorldState& world) const;
};

struct CorrectionConfig {
  double threshold = 0.001;  // meters
  int max_pushes = 20;
  bool defer_correction = false;

  static constexpr double kMinThreshold = 0.0005;  // meters

  void validate() const;
};

enum class TerminalStatus { converged, push_budget_exhausted, failed };

std::string_view to_string(TerminalStatus status);
std::optional<TerminalStatus> parse_terminal_status(std::string_view name);

/// One object's history. Ground-truth offsets come from the simulator; the
/// estimated ones are what the controller saw and acted on.
struct ObjectTrace {
  std::string object_id;
  OffsetVec injected_error;
  OffsetVec offset_after_place;
  std::vector<OffsetVec> offsets_after_each_push;
  OffsetVec estimated_after_place;
  std::vector<OffsetVec> estimated_after_each_push;
  std::vector<PushAxis> push_axes;
  int push_count = 0;
  TerminalStatus terminal_status = TerminalStatus::failed;
  std::optional<ErrorCode> failure;
  std::string failure_message;
  bool placed = false;

  /// Ground-truth offset at the end of the trace.
  const OffsetVec& final_offset() const {
    return offsets_after_each_push.empty() ? offset_after_place : offsets_after_each_push.back();
  }
};

struct PushCommand {
  PushAxis axis = PushAxis::x;
  double signed_distance = 0.0;  // meters
};

/// Push that removes the offset component on one axis. The first push takes
/// the larger component; later pushes alternate unless the other component is
/// below threshold/2. Distance is capped at `max_distance`.
PushCommand choose_push(const OffsetVec& offset, std::optional<PushAxis> last_axis, double threshold,
                        double max_distance);

/// Renders the scene and estimates the pose of one cube through the vision chain.
PlanarPose observe_pose(WorldState& world, const CameraModel& camera, std::string_view object_id,
                        std::optional<PlanarPose> expected);

struct CorrectionResult {
  OffsetVec final_offset;  // last vision estimate
  int push_count = 0;
};

/// Pushes until the estimated offset drops below the threshold. Appends to
/// `trace`'s per-push lists and sets its status. Throws CorrectionStalled
/// after three consecutive pushes that fail to reduce the estimate.
CorrectionResult correction_loop(std::string_view object_id, const PlanarPose& desired_pose, WorldState& world,
                                 const CameraModel& camera, const CorrectionConfig& config, ObjectTrace& trace);

/// Pick, place, inspect, correct for each plan entry in order. `pick_error`
/// displaces each cube after its pose is observed and before it is grasped.
/// Per-object failures are recorded in the trace and do not stop the run.
std::vector<ObjectTrace> run_arrangement(const ArrangementPlan& plan, WorldState& world, const CameraModel& camera,
                                         const CorrectionConfig& config, const ErrorSpec& pick_error = {});

}  // namespace rplace
