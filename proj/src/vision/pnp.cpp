#include "rplace/error.hpp"
#include "rplace/vision.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace rplace {

namespace {

// Similarity moving the centroid to the origin with mean distance sqrt(2).
Eigen::Matrix3d hartley_normalization(const std::array<Vec2, 4>& pts) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : pts) c += p;
  c /= 4.0;
  double mean = 0.0;
  for (const auto& p : pts) mean += (p - c).norm();
  mean /= 4.0;
  if (!(mean > 1e-12)) throw Error(ErrorCode::SingularConfiguration, "corners coincide");
  const double s = std::sqrt(2.0) / mean;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * c.x(), 0.0, s, -s * c.y(), 0.0, 0.0, 1.0;
  return t;
}

Vec2 apply_h(const Eigen::Matrix3d& h, const Vec2& p) {
  const Eigen::Vector3d q = h * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return q.head<2>() / q.z();
}

void check_nondegenerate(const std::array<Vec2, 4>& pts, const char* what) {
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, (p - pts[0]).norm());
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 a = pts[(i + 1) % 4] - pts[i];
    const Vec2 b = pts[(i + 2) % 4] - pts[i];
    if (std::abs(a.x() * b.y() - a.y() * b.x()) <= 1e-9 * scale * scale) {
      throw Error(ErrorCode::SingularConfiguration, std::string(what) + " has three collinear points");
    }
  }
}

}  // namespace

std::array<Eigen::Vector3d, 4> top_face_model(double edge) {
  if (!(edge > 0.0)) throw Error(ErrorCode::InvalidArgument, "edge must be positive");
  const double h = edge / 2.0;
  return {Eigen::Vector3d(-h, h, edge), Eigen::Vector3d(-h, -h, edge), Eigen::Vector3d(h, -h, edge),
          Eigen::Vector3d(h, h, edge)};
}

RigidTransform3 estimate_pose_dlt(const CornerSet& corners, const CameraModel& camera, double edge) {
  const auto model = top_face_model(edge);
  std::array<Vec2, 4> plane;
  for (std::size_t i = 0; i < 4; ++i) plane[i] = model[i].head<2>();
  for (const auto& c : corners.corners) {
    if (!c.allFinite()) throw Error(ErrorCode::InvalidArgument, "corner is not finite");
  }
  check_nondegenerate(corners.corners, "image quadrilateral");

  const Eigen::Matrix3d tp = hartley_normalization(plane);
  const Eigen::Matrix3d ti = hartley_normalization(corners.corners);
  Eigen::Matrix<double, 8, 9> a;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 x = apply_h(tp, plane[i]);
    const Vec2 u = apply_h(ti, corners.corners[i]);
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << -x.x(), -x.y(), -1.0, 0.0, 0.0, 0.0, u.x() * x.x(), u.x() * x.y(), u.x();
    a.row(r + 1) << 0.0, 0.0, 0.0, -x.x(), -x.y(), -1.0, u.y() * x.x(), u.y() * x.y(), u.y();
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(7) > 1e-10 * sv(0))) throw Error(ErrorCode::SingularConfiguration, "homography is not unique");
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d hmat = ti.inverse() * hn * tp;

  Eigen::Matrix3d k;
  k << camera.fx, 0.0, camera.cx, 0.0, camera.fy, camera.cy, 0.0, 0.0, 1.0;
  Eigen::Matrix3d m = k.inverse() * hmat;
  const double n1 = m.col(0).norm();
  const double n2 = m.col(1).norm();
  if (!(n1 > 0.0 && n2 > 0.0)) throw Error(ErrorCode::SingularConfiguration, "homography has a null column");
  double scale = 2.0 / (n1 + n2);
  if (m(2, 2) * scale < 0.0) scale = -scale;  // face in front of the camera
  m *= scale;
  Eigen::Matrix3d r;
  r.col(0) = m.col(0);
  r.col(1) = m.col(1);
  r.col(2) = m.col(0).cross(m.col(1));
  Eigen::JacobiSVD<Eigen::Matrix3d> rsvd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (rsvd.matrixU() * rsvd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d rot = rsvd.matrixU() * d * rsvd.matrixV().transpose();
  const Eigen::Vector3d t = m.col(2);
  if (!(t.z() > 0.0)) throw Error(ErrorCode::SingularConfiguration, "face plane behind the camera");

  const RigidTransform3 camera_from_face(rot, t);
  return camera_from_face * RigidTransform3::from_translation(Eigen::Vector3d(0.0, 0.0, -edge));
}

Residuals reprojection_residuals(const RigidTransform3& camera_from_object, const CornerSet& corners,
                                 const CameraModel& camera, double edge) {
  const auto model = top_face_model(edge);
  Residuals r;
  for (std::size_t i = 0; i < 4; ++i) {
    const PixelPoint p = project_camera_point(camera, camera_from_object.apply(model[i]));
    const auto row = static_cast<Eigen::Index>(2 * i);
    r(row) = p.u - corners.corners[i].x();
    r(row + 1) = p.v - corners.corners[i].y();
  }
  return r;
}

double reprojection_rms(const RigidTransform3& camera_from_object, const CornerSet& corners,
                        const CameraModel& camera, double edge) {
  return std::sqrt(reprojection_residuals(camera_from_object, corners, camera, edge).squaredNorm() / 4.0);
}

RigidTransform3 apply_increment(const RigidTransform3& pose, const PoseIncrement& delta) {
  const RigidTransform3 rot = RigidTransform3::from_axis_angle(delta.head<3>(), Eigen::Vector3d::Zero());
  return {rot.rotation() * pose.rotation(), pose.translation() + delta.tail<3>()};
}

PoseJacobian reprojection_jacobian(const RigidTransform3& camera_from_object, const CameraModel& camera, double edge) {
  const auto model = top_face_model(edge);
  PoseJacobian j;
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::Vector3d rx = camera_from_object.rotation() * model[i];
    const Eigen::Vector3d pc = rx + camera_from_object.translation();
    if (!(pc.z() > 0.0)) throw Error(ErrorCode::BehindCamera, "model point behind the camera");
    Eigen::Matrix<double, 2, 3> dproj;
    const double iz = 1.0 / pc.z();
    dproj << camera.fx * iz, 0.0, -camera.fx * pc.x() * iz * iz, 0.0, camera.fy * iz, -camera.fy * pc.y() * iz * iz;
    Eigen::Matrix3d skew;
    skew << 0.0, -rx.z(), rx.y(), rx.z(), 0.0, -rx.x(), -rx.y(), rx.x(), 0.0;
    const auto row = static_cast<Eigen::Index>(2 * i);
    j.block<2, 3>(row, 0) = dproj * (-skew);
    j.block<2, 3>(row, 3) = dproj;
  }
  return j;
}

LmReport refine_pose_lm_report(const RigidTransform3& initial, const CornerSet& corners, const CameraModel& camera,
                               double edge, const LmSettings& settings) {
  LmReport report;
  report.pose = initial;
  Residuals r = reprojection_residuals(initial, corners, camera, edge);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) throw Error(ErrorCode::DivergedOptimization, "initial cost is not finite");
  report.initial_rms = std::sqrt(cost / 4.0);
  double lambda = settings.initial_damping;

  for (int it = 0; it < settings.max_iterations; ++it) {
    report.iterations = it + 1;
    const PoseJacobian j = reprojection_jacobian(report.pose, camera, edge);
    const Eigen::Matrix<double, 6, 6> jtj = j.transpose() * j;
    const PoseIncrement g = j.transpose() * r;
    Eigen::Matrix<double, 6, 6> a = jtj;
    a.diagonal() += lambda * jtj.diagonal();
    const PoseIncrement delta = a.ldlt().solve(-g);
    if (!delta.allFinite()) throw Error(ErrorCode::DivergedOptimization, "step is not finite");
    if (delta.norm() < settings.step_tolerance) break;

    const RigidTransform3 candidate = apply_increment(report.pose, delta);
    Residuals r_new;
    double cost_new = std::numeric_limits<double>::infinity();
    try {
      r_new = reprojection_residuals(candidate, corners, camera, edge);
      cost_new = r_new.squaredNorm();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BehindCamera) throw;
    }
    if (std::isnan(cost_new)) throw Error(ErrorCode::DivergedOptimization, "cost is not finite");

    if (cost_new < cost) {
      const double decrease = (cost - cost_new) / std::max(cost, 1e-300);
      report.pose = candidate;
      r = r_new;
      cost = cost_new;
      ++report.accepted_steps;
      lambda = std::max(lambda / 10.0, 1e-12);
      if (decrease < settings.relative_cost_tolerance) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  report.final_rms = std::sqrt(cost / 4.0);
  return report;
}

RigidTransform3 refine_pose_lm(const RigidTransform3& initial, const CornerSet& corners, const CameraModel& camera,
                               double edge) {
  return refine_pose_lm_report(initial, corners, camera, edge).pose;
}

}  // namespace rplace
