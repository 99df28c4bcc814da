#include "rplace/geometry.hpp"

#include "rplace/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace rplace {

double wrap_symmetric(double angle, double period) {
  const double half = period / 2.0;
  double a = std::fmod(angle, period);
  if (a > half) a -= period;
  if (a <= -half) a += period;
  return a;
}

double normalize_angle(double angle) { return wrap_symmetric(angle, 2.0 * kPi); }

PlanarPose::PlanarPose(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(normalize_angle(yaw_)) {}

PlanarPose PlanarPose::compose(const PlanarPose& local) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {x + c * local.x - s * local.y, y + s * local.x + c * local.y, yaw + local.yaw};
}

PlanarPose PlanarPose::relative(const PlanarPose& other) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double ex = other.x - x;
  const double ey = other.y - y;
  return {c * ex + s * ey, -s * ex + c * ey, other.yaw - yaw};
}

namespace {

Eigen::Matrix3d project_to_so3(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

}  // namespace

double RigidTransform3::orthonormality_error(const Eigen::Matrix3d& rotation) {
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(rotation.determinant() - 1.0));
}

RigidTransform3::RigidTransform3()
    : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

RigidTransform3::RigidTransform3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "rigid transform has non-finite entries");
  }
  const double err = orthonormality_error(rotation);
  if (err > 1e-6) {
    throw Error(ErrorCode::InvalidArgument, "rotation is not orthonormal");
  }
  if (err > 1e-9) rotation_ = project_to_so3(rotation);
}

RigidTransform3 RigidTransform3::from_translation(const Eigen::Vector3d& translation) {
  return {Eigen::Matrix3d::Identity(), translation};
}

RigidTransform3 RigidTransform3::from_planar(const PlanarPose& pose, double z) {
  return {Eigen::AngleAxisd(pose.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix(),
          Eigen::Vector3d(pose.x, pose.y, z)};
}

RigidTransform3 RigidTransform3::from_axis_angle(const Eigen::Vector3d& axis_angle,
                                                 const Eigen::Vector3d& translation) {
  const double angle = axis_angle.norm();
  if (angle < 1e-300) return from_translation(translation);
  return {Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix(), translation};
}

Eigen::Matrix4d RigidTransform3::homogeneous() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

PlanarPose RigidTransform3::to_planar() const {
  return {translation_.x(), translation_.y(), std::atan2(rotation_(1, 0), rotation_(0, 0))};
}

RigidTransform3 compose(const RigidTransform3& a, const RigidTransform3& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

RigidTransform3 invert(const RigidTransform3& t) {
  const Eigen::Matrix3d rt = t.rotation().transpose();
  return {rt, -(rt * t.translation())};
}

OffsetVec OffsetVec::from_components(double dx, double dy, double dyaw) {
  return {dx, dy, dyaw, std::sqrt(dx * dx + dy * dy)};
}

OffsetVec planar_offset(const PlanarPose& desired, const PlanarPose& actual) {
  return OffsetVec::from_components(actual.x - desired.x, actual.y - desired.y,
                                    normalize_angle(actual.yaw - desired.yaw));
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace rplace
