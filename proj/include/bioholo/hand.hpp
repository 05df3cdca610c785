#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "bioholo/geometry.hpp"
#include "bioholo/scene.hpp"

namespace bioholo {

enum class HandId { Left, Right };

std::string_view to_string(HandId hand);
HandId hand_from_string(std::string_view name);

/// One skeletal sample from the hand tracker.
struct HandFrame {
  double t = 0.0;
  HandId hand = HandId::Right;
  Vec3 palm_center{};
  Vec3 palm_normal{0.0, 0.0, 1.0};
  std::vector<Vec3> joints;

  friend bool operator==(const HandFrame&, const HandFrame&) = default;
};

/// Throws InvalidArgument for non-finite points, an empty joint list, more
/// than 25 joints, or a palm normal that is not unit length within 1e-6.
void validate_hand_frame(const HandFrame& frame);

struct TrackerConfig {
  double fov_wide_deg = 150.0;
  double fov_deep_deg = 120.0;
  double range = 0.60;
  double rate_hz = 100.0;
  Vec3 origin{};
};

/// Pyramidal frustum: |atan2(x, z)| <= wide/2, |atan2(y, z)| <= deep/2 and
/// within range of the tracker origin.
bool in_tracking_fov(const Vec3& p, const TrackerConfig& cfg = {});

/// Palm center and every joint inside the tracking frustum.
bool in_tracking_fov(const HandFrame& frame, const TrackerConfig& cfg = {});

struct PalmPose {
  Vec3 center;
  Vec3 normal;
};

PalmPose palm_pose(const HandFrame& frame);

/// Hand points touching the heart (signed distance <= 0): the palm first,
/// then joints by ascending signed distance.
std::vector<Vec3> intersect_targets(const HandFrame& frame, const HeartHologram& heart);

inline constexpr double kDefaultFingertipRadius = 0.04;

/// Five fingertips on an arc in the palm plane at `radius` from the palm center.
std::vector<Vec3> synthesize_joints(const Vec3& palm, const Vec3& normal,
                                    double radius = kDefaultFingertipRadius);

struct PalmKeyframe {
  double t = 0.0;
  Vec3 palm;
  Vec3 normal{0.0, 0.0, 1.0};
};

/// Palm keyframes interpolated linearly; the normal is renormalized.
class HandScript {
 public:
  HandScript() = default;
  /// Throws InvalidArgument for an empty list or non-increasing times.
  explicit HandScript(std::vector<PalmKeyframe> keyframes, bool loop = false);

  PalmKeyframe pose_at(double t) const;

  const std::vector<PalmKeyframe>& keyframes() const { return keyframes_; }
  bool loop() const { return loop_; }
  double duration() const { return keyframes_.back().t - keyframes_.front().t; }

 private:
  std::vector<PalmKeyframe> keyframes_;
  bool loop_ = false;
};

/// `t,palm_x,palm_y,palm_z,nx,ny,nz` rows.
HandScript read_hand_script(std::istream& in, bool loop = false);

}  // namespace bioholo
