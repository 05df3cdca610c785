#pragma once

#include <cstdint>
#include <optional>

#include "bioholo/biosignal.hpp"
#include "bioholo/geometry.hpp"

namespace bioholo {

struct HeartGeometry {
  Vec3 anchor{0.0, 0.0, 0.30};
  Vec3 base_radii{0.05, 0.045, 0.06};
  double pulse_amplitude = 0.08;
};

/// Throws InvalidConfig if the anchor is outside the interaction volume,
/// a radius is not positive, or the amplitude is outside (0, 0.5).
void validate_heart_geometry(const HeartGeometry& g);

/// The beating heart: an ellipsoid anchored in the DeviceFrame whose semi-axes
/// pulse with the heartbeat waveform.
struct HeartHologram {
  Vec3 anchor{0.0, 0.0, 0.30};
  Vec3 base_radii{0.05, 0.045, 0.06};
  double pulse_amplitude = 0.08;
  BeatPhase phase{};
  double bpm = 0.0;
  bool flatline = true;
};

struct SceneState {
  HeartHologram heart;
  std::uint64_t seq = 0;
  double t = 0.0;
};

SceneState make_scene(const HeartGeometry& geometry = {});

/// Advances one frame. A missing rate keeps the previous bpm but marks the
/// heart flatlined; a flatlined heart keeps its phase.
SceneState update_scene(const SceneState& state, std::optional<double> smoothed_bpm, double dt);

/// Waveform value driving both the visual pulsation and the haptic envelope;
/// 0 while flatlined.
double heart_waveform(const HeartHologram& heart);

/// Waveform evaluated `ahead` seconds after the hologram's current phase.
double heart_waveform_ahead(const HeartHologram& heart, double ahead);

/// 1 + pulse_amplitude * waveform; exactly 1 while flatlined.
double surface_scale(const HeartHologram& heart);

/// Scaled ellipsoid distance approximation: negative inside, positive
/// outside. The sign is exact.
double signed_distance(const Vec3& p, const HeartHologram& heart);

}  // namespace bioholo
