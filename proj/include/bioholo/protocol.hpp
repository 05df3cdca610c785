#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bioholo/biosignal.hpp"
#include "bioholo/geometry.hpp"
#include "bioholo/hand.hpp"
#include "bioholo/haptics.hpp"

namespace bioholo {

inline constexpr int kProtocolVersion = 1;

enum class DeviceKind { Wearable, HandTracker, Headset, HapticDevice, Ui };

std::string_view to_string(DeviceKind kind);
DeviceKind device_kind_from_string(std::string_view name);

/// Observers receive FrameState and FocalBatch broadcasts unless they opt out.
bool subscribes_by_default(DeviceKind kind);

struct Hello {
  DeviceKind device = DeviceKind::Ui;
  int proto = kProtocolVersion;
  std::optional<bool> subscribe;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct HrUpdate {
  HeartRateSample sample;
  friend bool operator==(const HrUpdate&, const HrUpdate&) = default;
};

struct HandUpdate {
  FrameId frame = FrameId::Device;
  HandFrame hand;
  friend bool operator==(const HandUpdate&, const HandUpdate&) = default;
};

struct HandState {
  HandId hand = HandId::Right;
  bool haptic_active = false;
  Vec3 palm{};
  std::vector<Vec3> joints;
  friend bool operator==(const HandState&, const HandState&) = default;
};

/// Snapshot broadcast once per frame. Positions are in the DeviceFrame.
struct FrameState {
  std::uint64_t seq = 0;
  double t = 0.0;
  Vec3 anchor{};
  Vec3 radii{};
  double scale = 1.0;
  double phase = 0.0;
  double bpm = 0.0;
  bool flatline = true;
  std::vector<HandState> hands;
  friend bool operator==(const FrameState&, const FrameState&) = default;
};

struct FocalBatch {
  std::uint64_t seq = 0;
  std::vector<FocalPointCommand> commands;
  friend bool operator==(const FocalBatch&, const FocalBatch&) = default;
};

/// Point pairs mapping the headset frame (src) onto the device frame (dst).
struct CalibrationSet {
  std::vector<PointPair> pairs;
  friend bool operator==(const CalibrationSet&, const CalibrationSet&) = default;
};

struct CalibrationReply {
  std::array<double, 9> rotation{};  ///< row-major
  Vec3 translation{};
  double residual = 0.0;
  friend bool operator==(const CalibrationReply&, const CalibrationReply&) = default;
};

struct ErrorReply {
  std::string code;
  std::string detail;
  friend bool operator==(const ErrorReply&, const ErrorReply&) = default;
};

using Message = std::variant<Hello, HrUpdate, HandUpdate, FrameState, FocalBatch, CalibrationSet,
                             CalibrationReply, ErrorReply>;

/// Wire name of the message's type tag.
std::string_view type_name(const Message& m);

/// One JSON object per line, terminated by '\n'.
std::string encode(const Message& m);

/// Parses one line (trailing newline optional). Unknown fields are ignored.
/// Throws MalformedMessage, UnknownType, or VersionMismatch (hello only).
Message decode(std::string_view line);

CalibrationReply make_calibration_reply(const RigidTransform& t, double residual);

}  // namespace bioholo
