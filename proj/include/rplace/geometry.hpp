#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>
#include <vector>

namespace rplace {

constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Wraps an angle into (-period/2, period/2]. Used for the cube's 4-fold symmetry
/// (period pi/2).
double wrap_symmetric(double angle, double period);

/// Pose of an object on the table plane. The constructor normalizes yaw.
struct PlanarPose {
  double x = 0.0;    // meters
  double y = 0.0;    // meters
  double yaw = 0.0;  // radians, (-pi, pi]

  PlanarPose() = default;
  PlanarPose(double x_, double y_, double yaw_);

  Eigen::Vector2d position() const { return {x, y}; }

  /// Expresses `local` (given in this pose's frame) in the parent frame.
  PlanarPose compose(const PlanarPose& local) const;
  /// Expresses `other` in this pose's frame.
  PlanarPose relative(const PlanarPose& other) const;

  bool operator==(const PlanarPose&) const = default;
};

/// Rigid transform T(parent <- child). Rotation is kept orthonormal with det +1.
class RigidTransform3 {
 public:
  RigidTransform3();
  /// Throws InvalidArgument if `rotation` deviates from SO(3) by more than 1e-6;
  /// drift above 1e-9 is removed by projecting onto SO(3).
  RigidTransform3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static RigidTransform3 identity() { return {}; }
  static RigidTransform3 from_translation(const Eigen::Vector3d& translation);
  static RigidTransform3 from_planar(const PlanarPose& pose, double z = 0.0);
  static RigidTransform3 from_axis_angle(const Eigen::Vector3d& axis_angle,
                                         const Eigen::Vector3d& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& point) const { return rotation_ * point + translation_; }
  Eigen::Matrix4d homogeneous() const;

  /// Projects onto the table plane: position x/y and the heading of the local x axis.
  PlanarPose to_planar() const;

  /// max |R^T R - I| and |det R - 1|, whichever is larger.
  static double orthonormality_error(const Eigen::Matrix3d& rotation);

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

RigidTransform3 compose(const RigidTransform3& a, const RigidTransform3& b);
RigidTransform3 invert(const RigidTransform3& t);

inline RigidTransform3 operator*(const RigidTransform3& a, const RigidTransform3& b) { return compose(a, b); }

/// Placement offset between a desired and an actual pose.
struct OffsetVec {
  double dx = 0.0;    // meters
  double dy = 0.0;    // meters
  double dyaw = 0.0;  // radians
  double d_xy = 0.0;  // meters, sqrt(dx^2 + dy^2)

  static OffsetVec from_components(double dx, double dy, double dyaw);
  /// Offset whose components are negated (the reverse displacement).
  OffsetVec negated() const { return from_components(-dx, -dy, normalize_angle(-dyaw)); }
};

/// actual - desired, yaw difference wrapped into (-pi, pi].
OffsetVec planar_offset(const PlanarPose& desired, const PlanarPose& actual);

/// Axis-aligned rectangle on the table plane.
struct TableBounds {
  double x_min = -0.40;
  double x_max = 0.40;
  double y_min = -0.22;
  double y_max = 0.22;

  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
};

/// Counter-clockwise convex hull (monotone chain); collinear points are dropped.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);

}  // namespace rplace
