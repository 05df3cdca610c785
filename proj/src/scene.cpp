#include "bioholo/scene.hpp"

#include <algorithm>
#include <cmath>

#include "bioholo/error.hpp"
#include "bioholo/volume.hpp"

namespace bioholo {

void validate_heart_geometry(const HeartGeometry& g) {
  if (!is_finite(g.anchor) || !validate_volume(g.anchor)) {
    throw Error(ErrorCode::InvalidConfig, "scene.anchor: must lie inside the interaction volume");
  }
  if (!is_finite(g.base_radii) || !(g.base_radii.x > 0.0) || !(g.base_radii.y > 0.0) ||
      !(g.base_radii.z > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "scene.radii: all semi-axes must be positive");
  }
  if (!(g.pulse_amplitude > 0.0 && g.pulse_amplitude < 0.5)) {
    throw Error(ErrorCode::InvalidConfig, "scene.pulse_amplitude: must be in (0, 0.5)");
  }
}

SceneState make_scene(const HeartGeometry& geometry) {
  validate_heart_geometry(geometry);
  SceneState s;
  s.heart.anchor = geometry.anchor;
  s.heart.base_radii = geometry.base_radii;
  s.heart.pulse_amplitude = geometry.pulse_amplitude;
  return s;
}

SceneState update_scene(const SceneState& state, std::optional<double> smoothed_bpm, double dt) {
  if (!(dt >= 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be >= 0");
  SceneState next = state;
  HeartHologram& h = next.heart;
  if (smoothed_bpm) h.bpm = *smoothed_bpm;
  h.flatline = !smoothed_bpm || *smoothed_bpm == 0.0;
  if (!h.flatline) h.phase = advance_phase(h.phase, h.bpm, dt);
  next.seq = state.seq + 1;
  next.t = state.t + dt;
  return next;
}

double heart_waveform_ahead(const HeartHologram& heart, double ahead) {
  if (heart.flatline || !(heart.bpm > 0.0)) return 0.0;
  const BeatPhase phase = advance_phase(heart.phase, heart.bpm, ahead);
  const double period = 60.0 / heart.bpm;
  return ppg_waveform(heart.bpm, phase.radians() / kTwoPi * period);
}

double heart_waveform(const HeartHologram& heart) { return heart_waveform_ahead(heart, 0.0); }

double surface_scale(const HeartHologram& heart) {
  if (heart.flatline) return 1.0;
  return 1.0 + heart.pulse_amplitude * heart_waveform(heart);
}

double signed_distance(const Vec3& p, const HeartHologram& heart) {
  const double scale = surface_scale(heart);
  const Vec3 r = heart.base_radii * scale;
  const Vec3 d = p - heart.anchor;
  const Vec3 q{d.x / r.x, d.y / r.y, d.z / r.z};
  return (norm(q) - 1.0) * std::min({r.x, r.y, r.z});
}

}  // namespace bioholo
