#pragma once

#include "rplace/geometry.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace rplace {

enum class CubeColor { red, green, blue, yellow };

std::string_view to_string(CubeColor color);
std::optional<CubeColor> parse_cube_color(std::string_view name);

struct CubeObject {
  std::string id;
  CubeColor color = CubeColor::red;
  double edge = 0.05;  // meters
  PlanarPose pose;     // center of the bottom face on the table

  double height() const { return edge; }
  /// Footprint corners in counter-clockwise order (world frame).
  std::array<Eigen::Vector2d, 4> footprint() const;
};

struct GripperModel {
  double max_opening = 0.11;       // meters
  double finger_thickness = 0.01;  // meters
  double fingertip_width = 0.02;   // meters

  void validate() const;
};

enum class NoiseMode { sim, real };

std::string_view to_string(NoiseMode mode);
std::optional<NoiseMode> parse_noise_mode(std::string_view name);

/// Magnitudes of the unmodeled manipulation and sensing errors.
struct NoiseProfile {
  NoiseMode mode = NoiseMode::sim;
  double grasp_lateral_sigma = 0.0;     // meters, along the closing axis after centering
  double release_sigma = 0.0;           // meters, per table axis
  double release_yaw_sigma = 0.0;       // radians
  double push_distance_rel_sigma = 0.0; // unitless, fraction of the commanded distance
  double push_lateral_sigma = 0.0;      // meters, orthogonal to the push
  double pixel_noise_sigma = 0.0;       // pixels (scaled to gray levels by the renderer)

  static NoiseProfile preset(NoiseMode mode);
  static NoiseProfile zero(NoiseMode mode = NoiseMode::sim);

  void validate() const;
};

/// Parameters of the quasi-static contact model that are not noise.
struct ContactModel {
  double yaw_pull_factor = 0.8;              // fraction of the yaw misalignment removed per push
  double yaw_pull_clamp = deg_to_rad(10.0);  // radians, maximum correction per push
  double rotation_drag_lever = 0.4;          // lever of the first-contact pivot, fraction of edge/2
  double max_push_distance = 0.05;           // meters
};

enum class PushAxis { x, y };

std::string_view to_string(PushAxis axis);

struct GraspOutcome {
  std::string object_id;
  /// Pose of the held cube in the gripper frame (x: perpendicular to the closing
  /// axis, y: closing axis).
  PlanarPose relative;
};

/// Quasi-static table scene. Every mutating action is transactional: when it
/// throws, the scene (including the random stream) is exactly as before.
class WorldState {
 public:
  WorldState(TableBounds table, NoiseProfile noise, std::uint64_t seed, GripperModel gripper = {},
             ContactModel contact = {});

  /// Adds a cube; throws InvalidArgument on a duplicate id and OutOfBounds /
  /// PlacementCollision if the footprint is not free.
  void add_cube(CubeObject cube);

  bool has_cube(std::string_view id) const;
  /// Cube on the table (not the held one).
  const CubeObject& cube(std::string_view id) const;
  std::vector<const CubeObject*> cubes_on_table() const;
  /// Ground-truth pose, whether the cube is on the table or held.
  const CubeObject& any_cube(std::string_view id) const;

  const std::optional<GraspOutcome>& held() const { return held_; }

  GraspOutcome pick(std::string_view object_id, const PlanarPose& grasp_pose);
  PlanarPose place(const PlanarPose& desired_pose);
  PlanarPose push(std::string_view object_id, PushAxis axis, double signed_distance);

  /// Puts the held cube back where it was picked from.
  void abort_hold();

  /// Moves a cube on the table to `pose`; used by error injection.
  void teleport(std::string_view object_id, const PlanarPose& pose);

  const TableBounds& table() const { return table_; }
  const NoiseProfile& noise() const { return noise_; }
  const GripperModel& gripper() const { return gripper_; }
  const ContactModel& contact() const { return contact_; }
  std::mt19937_64& rng() { return rng_; }

  /// Zero-mean Gaussian draw; draws nothing when sigma is zero.
  double gaussian(double sigma);

  /// Checks that `candidate` fits on the table and does not overlap any other cube.
  bool footprint_free(const CubeObject& candidate, std::string_view ignore_id) const;

 private:
  CubeObject& mutable_cube(std::string_view id);

  TableBounds table_;
  NoiseProfile noise_;
  GripperModel gripper_;
  ContactModel contact_;
  std::mt19937_64 rng_;
  std::map<std::string, CubeObject, std::less<>> cubes_;
  std::optional<GraspOutcome> held_;
  std::optional<CubeObject> held_cube_;
  PlanarPose held_origin_;
};

/// Separating-axis test for two convex quadrilaterals; touching does not count.
bool convex_quads_overlap(const std::array<Eigen::Vector2d, 4>& a, const std::array<Eigen::Vector2d, 4>& b);

/// Separating-axis test for arbitrary convex polygons given in order.
bool convex_polygons_overlap(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b);

}  // namespace rplace
