#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bioholo/biosignal.hpp"
#include "bioholo/geometry.hpp"
#include "bioholo/hand.hpp"
#include "bioholo/haptics.hpp"
#include "bioholo/protocol.hpp"
#include "bioholo/scene.hpp"

namespace bioholo {

using SessionId = std::uint64_t;

struct FrameLoopConfig {
  HeartGeometry heart{};
  HapticMode mode = HapticMode::pulsing_radius();
  RenderParams render{};
  HrBufferConfig hr{};
  double frame_rate = 60.0;
  double hand_stale = 0.2;
};

/// Throws InvalidConfig naming the offending key.
void validate_frame_loop_config(const FrameLoopConfig& cfg);

/// Converts a hand frame into the DeviceFrame. Headset data goes through the
/// calibration; device and world data pass through unchanged.
HandFrame transform_ingest(const HandFrame& frame, FrameId from,
                           const RigidTransform& headset_to_device);

struct FrameDiagnostics {
  std::size_t hr_ingested = 0;
  std::size_t hr_rejected = 0;
  std::size_t hand_frames = 0;
  std::size_t hand_rejected = 0;
  std::size_t hand_superseded = 0;
  std::size_t stale_hands_dropped = 0;
  std::size_t focal_commands = 0;
  std::size_t dropped_out_of_volume = 0;
  std::size_t calibrations = 0;
  std::string last_error;
};

struct Reply {
  SessionId to = 0;
  Message message;
};

struct TickOutput {
  SceneState scene;
  FrameState frame;
  FocalBatch focal;
  std::vector<Reply> replies;
};

/// The authoritative per-frame state machine. It is the sole owner of the
/// heart-rate buffer, the latest hand frames, and the scene; inputs are queued
/// with post() and consumed in a fixed order by tick().
class FrameLoop {
 public:
  explicit FrameLoop(FrameLoopConfig cfg = {});

  /// Queues an input for the next tick. HrUpdate, HandUpdate and
  /// CalibrationSet are consumed; anything else is ignored.
  void post(SessionId from, Message message);

  /// Runs one frame at server time `now`: calibration updates, heart-rate
  /// ingest, hand ingest, scene update, haptic rendering, snapshot.
  TickOutput tick(double now);

  const SceneState& scene() const { return scene_; }
  const HrBuffer& hr_buffer() const { return hr_; }
  const RigidTransform& calibration() const { return calibration_; }
  const FrameDiagnostics& diagnostics() const { return diag_; }
  const FrameLoopConfig& config() const { return cfg_; }
  double frame_period() const { return 1.0 / cfg_.frame_rate; }

  /// Latest DeviceFrame hand per hand id, if any.
  const std::optional<HandFrame>& latest_hand(HandId id) const;

 private:
  struct Pending {
    SessionId from;
    Message message;
  };
  struct TrackedHand {
    HandFrame frame;
    double received_at = 0.0;
  };

  void apply_calibration(SessionId from, const CalibrationSet& set, std::vector<Reply>& replies);
  void ingest_hand(const HandUpdate& update, double now);

  FrameLoopConfig cfg_;
  SceneState scene_;
  HrBuffer hr_;
  RigidTransform calibration_{};
  std::array<std::optional<TrackedHand>, 2> hands_{};
  std::array<std::optional<HandFrame>, 2> hand_view_{};
  std::vector<Pending> inbox_;
  FrameDiagnostics diag_;
};

}  // namespace bioholo
