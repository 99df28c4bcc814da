#include "rplace/world.hpp"

#include "rplace/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rplace {

std::string_view to_string(CubeColor color) {
  switch (color) {
    case CubeColor::red: return "red";
    case CubeColor::green: return "green";
    case CubeColor::blue: return "blue";
    case CubeColor::yellow: return "yellow";
  }
  return "red";
}

std::optional<CubeColor> parse_cube_color(std::string_view name) {
  for (CubeColor c : {CubeColor::red, CubeColor::green, CubeColor::blue, CubeColor::yellow}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(NoiseMode mode) { return mode == NoiseMode::sim ? "sim" : "real"; }

std::optional<NoiseMode> parse_noise_mode(std::string_view name) {
  if (name == "sim") return NoiseMode::sim;
  if (name == "real") return NoiseMode::real;
  return std::nullopt;
}

std::string_view to_string(PushAxis axis) { return axis == PushAxis::x ? "x" : "y"; }

std::array<Eigen::Vector2d, 4> CubeObject::footprint() const {
  const double h = edge / 2.0;
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  std::array<Eigen::Vector2d, 4> out;
  const std::array<Eigen::Vector2d, 4> local = {Eigen::Vector2d(-h, -h), Eigen::Vector2d(h, -h),
                                                 Eigen::Vector2d(h, h), Eigen::Vector2d(-h, h)};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {pose.x + c * local[i].x() - s * local[i].y(), pose.y + s * local[i].x() + c * local[i].y()};
  }
  return out;
}

void GripperModel::validate() const {
  if (!(max_opening > 0.0) || !(finger_thickness > 0.0) || !(fingertip_width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gripper dimensions must be positive");
  }
}

NoiseProfile NoiseProfile::preset(NoiseMode mode) {
  NoiseProfile p;
  p.mode = mode;
  if (mode == NoiseMode::sim) {
    p.grasp_lateral_sigma = 0.0003;
    p.release_sigma = 0.0003;
    p.release_yaw_sigma = deg_to_rad(0.3);
    p.push_distance_rel_sigma = 0.02;
    p.push_lateral_sigma = 0.0002;
    p.pixel_noise_sigma = 0.2;
  } else {
    p.grasp_lateral_sigma = 0.0015;
    p.release_sigma = 0.002;
    p.release_yaw_sigma = deg_to_rad(1.0);
    p.push_distance_rel_sigma = 0.06;
    p.push_lateral_sigma = 0.0005;
    p.pixel_noise_sigma = 0.5;
  }
  return p;
}

NoiseProfile NoiseProfile::zero(NoiseMode mode) {
  NoiseProfile p;
  p.mode = mode;
  return p;
}

void NoiseProfile::validate() const {
  for (double s : {grasp_lateral_sigma, release_sigma, release_yaw_sigma, push_distance_rel_sigma,
                   push_lateral_sigma, pixel_noise_sigma}) {
    if (!std::isfinite(s) || s < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "noise sigmas must be finite and >= 0");
    }
  }
}

namespace {

bool separated_on_axis(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b,
                       const Eigen::Vector2d& axis) {
  constexpr double kTouch = 1e-12;
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (const auto& p : a) {
    const double d = axis.dot(p);
    amin = std::min(amin, d);
    amax = std::max(amax, d);
  }
  for (const auto& p : b) {
    const double d = axis.dot(p);
    bmin = std::min(bmin, d);
    bmax = std::max(bmax, d);
  }
  return amax <= bmin + kTouch || bmax <= amin + kTouch;
}

bool any_edge_separates(const std::vector<Eigen::Vector2d>& edges_of, const std::vector<Eigen::Vector2d>& a,
                        const std::vector<Eigen::Vector2d>& b) {
  const std::size_t n = edges_of.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e = edges_of[(i + 1) % n] - edges_of[i];
    if (e.squaredNorm() == 0.0) continue;
    if (separated_on_axis(a, b, Eigen::Vector2d(-e.y(), e.x()).normalized())) return true;
  }
  return false;
}

std::vector<Eigen::Vector2d> as_vector(const std::array<Eigen::Vector2d, 4>& a) { return {a.begin(), a.end()}; }

}  // namespace

bool convex_polygons_overlap(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b) {
  if (a.empty() || b.empty()) return false;
  return !any_edge_separates(a, a, b) && !any_edge_separates(b, a, b);
}

bool convex_quads_overlap(const std::array<Eigen::Vector2d, 4>& a, const std::array<Eigen::Vector2d, 4>& b) {
  return convex_polygons_overlap(as_vector(a), as_vector(b));
}

WorldState::WorldState(TableBounds table, NoiseProfile noise, std::uint64_t seed, GripperModel gripper,
                       ContactModel contact)
    : table_(table), noise_(noise), gripper_(gripper), contact_(contact), rng_(seed) {
  noise_.validate();
  gripper_.validate();
  if (!(table_.x_max > table_.x_min) || !(table_.y_max > table_.y_min)) {
    throw Error(ErrorCode::InvalidArgument, "table bounds are empty");
  }
}

double WorldState::gaussian(double sigma) {
  if (sigma == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng_);
}

bool WorldState::footprint_free(const CubeObject& candidate, std::string_view ignore_id) const {
  const auto fp = candidate.footprint();
  for (const auto& p : fp) {
    if (!table_.contains(p)) return false;
  }
  for (const auto& [id, other] : cubes_) {
    if (id == ignore_id) continue;
    if (convex_quads_overlap(fp, other.footprint())) return false;
  }
  return true;
}

namespace {

void require_free(const WorldState& world, const CubeObject& candidate, std::string_view ignore_id,
                  ErrorCode overlap_code) {
  for (const auto& p : candidate.footprint()) {
    if (!world.table().contains(p)) {
      throw Error(ErrorCode::OutOfBounds, "cube '" + candidate.id + "' would leave the table");
    }
  }
  if (!world.footprint_free(candidate, ignore_id)) {
    throw Error(overlap_code, "cube '" + candidate.id + "' would overlap another cube");
  }
}

}  // namespace

void WorldState::add_cube(CubeObject cube) {
  if (!(cube.edge > 0.0)) throw Error(ErrorCode::InvalidArgument, "cube edge must be positive");
  if (!(gripper_.max_opening > cube.edge)) {
    throw Error(ErrorCode::InvalidArgument, "cube '" + cube.id + "' is wider than the gripper stroke");
  }
  if (has_cube(cube.id)) throw Error(ErrorCode::InvalidArgument, "duplicate cube id '" + cube.id + "'");
  require_free(*this, cube, "", ErrorCode::PlacementCollision);
  std::string key = cube.id;
  cubes_.emplace(std::move(key), std::move(cube));
}

bool WorldState::has_cube(std::string_view id) const {
  return cubes_.find(id) != cubes_.end() || (held_cube_ && held_cube_->id == id);
}

const CubeObject& WorldState::cube(std::string_view id) const {
  auto it = cubes_.find(id);
  if (it == cubes_.end()) throw Error(ErrorCode::ObjectNotFound, "no cube '" + std::string(id) + "' on the table");
  return it->second;
}

CubeObject& WorldState::mutable_cube(std::string_view id) {
  auto it = cubes_.find(id);
  if (it == cubes_.end()) throw Error(ErrorCode::ObjectNotFound, "no cube '" + std::string(id) + "' on the table");
  return it->second;
}

const CubeObject& WorldState::any_cube(std::string_view id) const {
  if (held_cube_ && held_cube_->id == id) return *held_cube_;
  return cube(id);
}

std::vector<const CubeObject*> WorldState::cubes_on_table() const {
  std::vector<const CubeObject*> out;
  out.reserve(cubes_.size());
  for (const auto& [id, c] : cubes_) out.push_back(&c);
  return out;
}

GraspOutcome WorldState::pick(std::string_view object_id, const PlanarPose& grasp_pose) {
  if (held_) throw Error(ErrorCode::AlreadyHolding, "gripper already holds '" + held_->object_id + "'");
  const CubeObject& target = cube(object_id);

  // Cube pose in the gripper frame: x is perpendicular to the closing axis, y is the closing axis.
  const PlanarPose rel = grasp_pose.relative(target.pose);
  const double misalignment = wrap_symmetric(rel.yaw, kPi / 2.0);
  if (std::abs(misalignment) >= kPi / 4.0) {
    throw Error(ErrorCode::GraspInfeasible, "fingers meet the cube corner-first");
  }
  const double half_edge = target.edge / 2.0;
  if (!(std::abs(rel.y) + half_edge < gripper_.max_opening / 2.0)) {
    throw Error(ErrorCode::GraspInfeasible, "cube is outside the open jaws");
  }

  // The jaw nearer to the cube touches first and the cube pivots about that
  // contact while it aligns to the fingertips, which drags it sideways. The
  // offset along the closing axis is removed by the parallel jaws.
  const double first_contact = rel.y >= 0.0 ? 1.0 : -1.0;
  const double lever = contact_.rotation_drag_lever * half_edge;
  const double perpendicular =
      rel.x * std::cos(misalignment) - first_contact * lever * std::sin(misalignment);
  const double closing = gaussian(noise_.grasp_lateral_sigma);

  GraspOutcome outcome{std::string(object_id), PlanarPose(perpendicular, closing, rel.yaw - misalignment)};
  auto it = cubes_.find(object_id);
  held_origin_ = it->second.pose;
  held_cube_ = it->second;
  cubes_.erase(it);
  held_ = outcome;
  return outcome;
}

PlanarPose WorldState::place(const PlanarPose& desired_pose) {
  if (!held_) throw Error(ErrorCode::NothingHeld, "nothing to place");
  const auto saved_rng = rng_;
  const double nx = gaussian(noise_.release_sigma);
  const double ny = gaussian(noise_.release_sigma);
  const double nyaw = gaussian(noise_.release_yaw_sigma);
  const PlanarPose actual = desired_pose.compose(held_->relative).compose(PlanarPose(nx, ny, nyaw));

  CubeObject candidate = *held_cube_;
  candidate.pose = actual;
  try {
    require_free(*this, candidate, candidate.id, ErrorCode::PlacementCollision);
  } catch (...) {
    rng_ = saved_rng;
    throw;
  }
  cubes_.emplace(candidate.id, candidate);
  held_.reset();
  held_cube_.reset();
  return actual;
}

void WorldState::abort_hold() {
  if (!held_) return;
  CubeObject restored = *held_cube_;
  restored.pose = held_origin_;
  cubes_.emplace(restored.id, restored);
  held_.reset();
  held_cube_.reset();
}

void WorldState::teleport(std::string_view object_id, const PlanarPose& pose) {
  CubeObject candidate = cube(object_id);
  candidate.pose = pose;
  require_free(*this, candidate, candidate.id, ErrorCode::PlacementCollision);
  mutable_cube(object_id).pose = pose;
}

PlanarPose WorldState::push(std::string_view object_id, PushAxis axis, double signed_distance) {
  if (!std::isfinite(signed_distance) || std::abs(signed_distance) > contact_.max_push_distance) {
    throw Error(ErrorCode::DistanceCapExceeded, "push distance exceeds the single-push limit");
  }
  const CubeObject& target = cube(object_id);
  const int along = axis == PushAxis::x ? 0 : 1;
  const int across = 1 - along;
  const double direction = signed_distance >= 0.0 ? 1.0 : -1.0;

  // Swept region of the cube plus the finger strip that trails it.
  const auto fp = target.footprint();
  double along_min = std::numeric_limits<double>::infinity(), along_max = -along_min;
  double across_min = along_min, across_max = -along_min;
  for (const auto& p : fp) {
    along_min = std::min(along_min, p[along]);
    along_max = std::max(along_max, p[along]);
    across_min = std::min(across_min, p[across]);
    across_max = std::max(across_max, p[across]);
  }
  const double back = direction > 0.0 ? along_min : along_max;
  const double finger_back = back - direction * gripper_.finger_thickness;
  std::vector<Eigen::Vector2d> corridor_pts;
  auto add = [&](double a, double c) {
    Eigen::Vector2d p;
    p[along] = a;
    p[across] = c;
    corridor_pts.push_back(p);
  };
  for (double shift : {0.0, signed_distance}) {
    for (const auto& p : fp) add(p[along] + shift, p[across]);
    add(finger_back + shift, across_min);
    add(finger_back + shift, across_max);
  }
  const auto corridor = convex_hull(corridor_pts);
  for (const auto& [id, other] : cubes_) {
    if (id == object_id) continue;
    if (convex_polygons_overlap(corridor, as_vector(other.footprint()))) {
      throw Error(ErrorCode::PushBlocked, "cube '" + id + "' is in the push corridor");
    }
  }

  const auto saved_rng = rng_;
  const double rel_error = gaussian(noise_.push_distance_rel_sigma);
  const double lateral_error = gaussian(noise_.push_lateral_sigma);

  // The narrow opening cages the cube and pulls its yaw toward the fingers.
  const double misalignment = wrap_symmetric(target.pose.yaw, kPi / 2.0);
  const double correction = std::clamp(contact_.yaw_pull_factor * misalignment, -contact_.yaw_pull_clamp,
                                       contact_.yaw_pull_clamp);

  Eigen::Vector2d delta;
  delta[along] = signed_distance * (1.0 + rel_error);
  delta[across] = lateral_error;
  CubeObject candidate = target;
  candidate.pose = PlanarPose(target.pose.x + delta.x(), target.pose.y + delta.y(), target.pose.yaw - correction);
  try {
    require_free(*this, candidate, candidate.id, ErrorCode::PushBlocked);
  } catch (...) {
    rng_ = saved_rng;
    throw;
  }
  mutable_cube(object_id).pose = candidate.pose;
  return candidate.pose;
}

}  // namespace rplace
