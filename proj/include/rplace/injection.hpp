#pragma once

#include "rplace/geometry.hpp"
#include "rplace/world.hpp"

#include <optional>
#include <string_view>

namespace rplace {

enum class InjectionKind { none, translation, orientation, estimator_proxy };

std::string_view to_string(InjectionKind kind);
std::optional<InjectionKind> parse_injection_kind(std::string_view name);

/// Pick-error injected by displacing a cube right before it is grasped.
struct ErrorSpec {
  InjectionKind kind = InjectionKind::none;
  double max_shift = 0.025;            // meters, per table axis
  double max_rot = deg_to_rad(40.0);   // radians

  /// Bounds must keep the grasp feasible: shift <= edge/2, rotation <= 45 deg.
  void validate(double edge) const;
};

/// Displaces `object_id` by a random offset drawn from the world's stream and
/// returns it. Every kind, `none` included, consumes the same three draws
/// (dx, dy, dyaw) and zeroes the ones it does not use, so experiments that
/// differ only in kind see identical downstream noise for a given seed.
OffsetVec inject(WorldState& world, std::string_view object_id, const ErrorSpec& spec);

}  // namespace rplace
