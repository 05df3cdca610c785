#include "bioholo/hand.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bioholo/csv.hpp"
#include "bioholo/error.hpp"

namespace bioholo {

namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr std::size_t kMaxJoints = 25;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

std::string_view to_string(HandId hand) { return hand == HandId::Left ? "left" : "right"; }

HandId hand_from_string(std::string_view name) {
  if (name == "left") return HandId::Left;
  if (name == "right") return HandId::Right;
  throw Error(ErrorCode::InvalidArgument, "unknown hand '" + std::string(name) + "'");
}

void validate_hand_frame(const HandFrame& frame) {
  if (!std::isfinite(frame.t)) throw Error(ErrorCode::InvalidArgument, "hand frame time not finite");
  if (!is_finite(frame.palm_center) || !is_finite(frame.palm_normal)) {
    throw Error(ErrorCode::InvalidArgument, "palm pose not finite");
  }
  if (std::abs(norm(frame.palm_normal) - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::InvalidArgument, "palm normal is not unit length");
  }
  if (frame.joints.empty() || frame.joints.size() > kMaxJoints) {
    throw Error(ErrorCode::InvalidArgument, "hand frame needs 1..25 joints");
  }
  for (const auto& j : frame.joints) {
    if (!is_finite(j)) throw Error(ErrorCode::InvalidArgument, "joint position not finite");
  }
}

bool in_tracking_fov(const Vec3& p, const TrackerConfig& cfg) {
  const Vec3 d = p - cfg.origin;
  if (norm(d) > cfg.range) return false;
  const double wide = std::abs(std::atan2(d.x, d.z));
  const double deep = std::abs(std::atan2(d.y, d.z));
  return wide <= deg2rad(cfg.fov_wide_deg / 2.0) && deep <= deg2rad(cfg.fov_deep_deg / 2.0);
}

bool in_tracking_fov(const HandFrame& frame, const TrackerConfig& cfg) {
  if (!in_tracking_fov(frame.palm_center, cfg)) return false;
  return std::all_of(frame.joints.begin(), frame.joints.end(),
                     [&](const Vec3& j) { return in_tracking_fov(j, cfg); });
}

PalmPose palm_pose(const HandFrame& frame) { return {frame.palm_center, frame.palm_normal}; }

std::vector<Vec3> intersect_targets(const HandFrame& frame, const HeartHologram& heart) {
  std::vector<Vec3> out;
  if (signed_distance(frame.palm_center, heart) <= 0.0) out.push_back(frame.palm_center);

  std::vector<std::pair<double, Vec3>> touching;
  for (const auto& j : frame.joints) {
    const double d = signed_distance(j, heart);
    if (d <= 0.0) touching.emplace_back(d, j);
  }
  std::stable_sort(touching.begin(), touching.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [d, j] : touching) out.push_back(j);
  return out;
}

std::vector<Vec3> synthesize_joints(const Vec3& palm, const Vec3& normal, double radius) {
  const auto [u, v] = plane_basis(normal);
  std::vector<Vec3> joints;
  joints.reserve(5);
  // Fingertips fan out from 30 to 150 degrees around u, centered on v.
  for (int k = 0; k < 5; ++k) {
    const double a = std::numbers::pi / 6.0 * (k + 1);
    joints.push_back(palm + radius * (std::cos(a) * u + std::sin(a) * v));
  }
  return joints;
}

HandScript::HandScript(std::vector<PalmKeyframe> keyframes, bool loop)
    : keyframes_(std::move(keyframes)), loop_(loop) {
  if (keyframes_.empty()) throw Error(ErrorCode::InvalidArgument, "hand script has no keyframes");
  for (std::size_t i = 0; i < keyframes_.size(); ++i) {
    const auto& k = keyframes_[i];
    if (!is_finite(k.palm) || !is_finite(k.normal) || !(norm(k.normal) > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "bad keyframe " + std::to_string(i));
    }
    if (i > 0 && !(k.t > keyframes_[i - 1].t)) {
      throw Error(ErrorCode::InvalidArgument, "keyframe times must be strictly increasing");
    }
  }
}

PalmKeyframe HandScript::pose_at(double t) const {
  const auto& kf = keyframes_;
  if (loop_ && kf.size() > 1 && duration() > 0.0 && t > kf.back().t) {
    t = kf.front().t + std::fmod(t - kf.front().t, duration());
  }
  if (t <= kf.front().t) return {t, kf.front().palm, normalized(kf.front().normal)};
  if (t >= kf.back().t) return {t, kf.back().palm, normalized(kf.back().normal)};

  const auto hi = std::upper_bound(kf.begin(), kf.end(), t,
                                   [](double v, const PalmKeyframe& k) { return v < k.t; });
  const auto lo = hi - 1;
  const double a = (t - lo->t) / (hi->t - lo->t);
  const Vec3 palm = lo->palm + a * (hi->palm - lo->palm);
  const Vec3 n = lo->normal + a * (hi->normal - lo->normal);
  return {t, palm, normalized(n)};
}

HandScript read_hand_script(std::istream& in, bool loop) {
  std::vector<PalmKeyframe> keyframes;
  for (const auto& r : csv::read_numeric(in, 7)) {
    keyframes.push_back({r[0], {r[1], r[2], r[3]}, {r[4], r[5], r[6]}});
  }
  try {
    return HandScript(std::move(keyframes), loop);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace bioholo
