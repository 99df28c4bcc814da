#include "rplace/injection.hpp"

#include "rplace/error.hpp"

#include <cmath>
#include <array>
#include <random>

namespace rplace {

std::string_view to_string(InjectionKind kind) {
  switch (kind) {
    case InjectionKind::none: return "none";
    case InjectionKind::translation: return "translation";
    case InjectionKind::orientation: return "orientation";
    case InjectionKind::estimator_proxy: return "estimator_proxy";
  }
  return "none";
}

std::optional<InjectionKind> parse_injection_kind(std::string_view name) {
  for (auto k : {InjectionKind::none, InjectionKind::translation, InjectionKind::orientation,
                 InjectionKind::estimator_proxy}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void ErrorSpec::validate(double edge) const {
  if (!std::isfinite(max_shift) || max_shift < 0.0 || max_shift > edge / 2.0 + 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "max_shift must lie in [0, edge/2]");
  }
  if (!std::isfinite(max_rot) || max_rot < 0.0 || max_rot > kPi / 4.0 + 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "max_rot must lie in [0, 45 deg]");
  }
}

OffsetVec inject(WorldState& world, std::string_view object_id, const ErrorSpec& spec) {
  const CubeObject& target = world.cube(object_id);
  spec.validate(target.edge);

  // All three unit draws are consumed for every kind, so the stream after
  // injection is the same across kinds for a given seed.
  const auto saved_rng = world.rng();
  std::array<double, 3> unit;
  for (double& u : unit) u = 2.0 * std::generate_canonical<double, 53>(world.rng()) - 1.0;
  const bool shifts = spec.kind == InjectionKind::translation || spec.kind == InjectionKind::estimator_proxy;
  const bool rotates = spec.kind == InjectionKind::orientation || spec.kind == InjectionKind::estimator_proxy;
  const double dx = shifts ? unit[0] * spec.max_shift : 0.0;
  const double dy = shifts ? unit[1] * spec.max_shift : 0.0;
  const double dyaw = rotates ? unit[2] * spec.max_rot : 0.0;
  if (spec.kind == InjectionKind::none) return {};
  const PlanarPose& pose = target.pose;
  try {
    world.teleport(object_id, PlanarPose(pose.x + dx, pose.y + dy, pose.yaw + dyaw));
  } catch (const Error& e) {
    world.rng() = saved_rng;
    throw Error(ErrorCode::OutOfBounds, std::string("injected displacement is not feasible: ") + e.what());
  }
  return OffsetVec::from_components(dx, dy, dyaw);
}

}  // namespace rplace
