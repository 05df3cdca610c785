#pragma once

#include "bioholo/geometry.hpp"

namespace bioholo {

/// Region above the array where a focal point can be produced (DeviceFrame, meters).
struct InteractionVolume {
  static constexpr double kHalfWidthX = 0.20;
  static constexpr double kHalfWidthY = 0.20;
  static constexpr double kMinZ = 0.0;
  static constexpr double kMaxZ = 0.60;
};

/// Closed-interval containment test against InteractionVolume.
constexpr bool validate_volume(const Vec3& p) {
  return p.x >= -InteractionVolume::kHalfWidthX && p.x <= InteractionVolume::kHalfWidthX &&
         p.y >= -InteractionVolume::kHalfWidthY && p.y <= InteractionVolume::kHalfWidthY &&
         p.z >= InteractionVolume::kMinZ && p.z <= InteractionVolume::kMaxZ;
}

}  // namespace bioholo
