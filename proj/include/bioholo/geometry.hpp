#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace bioholo {

/// Position or direction in meters.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

  friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}
Vec3 normalized(const Vec3& v);

inline Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }
inline Vec3 from_eigen(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

std::ostream& operator<<(std::ostream& os, const Vec3& v);

/// Orthonormal basis (u, v) of the plane perpendicular to a unit normal.
/// u = normalize(normal x z) unless normal is (anti)parallel to z, then u = x.
/// v = normal x u.
std::pair<Vec3, Vec3> plane_basis(const Vec3& normal);

/// DeviceFrame has its origin at the array center with z pointing up.
enum class FrameId { Device, Headset, World };

std::string_view to_string(FrameId frame);
FrameId frame_from_string(std::string_view name);

/// Proper rigid motion p -> R p + t.
class RigidTransform {
 public:
  RigidTransform() = default;

  /// Throws InvalidArgument unless rotation is orthonormal with det +1 (within 1e-9).
  RigidTransform(const Eigen::Matrix3d& rotation, const Vec3& translation);

  static RigidTransform from_translation(const Vec3& t);
  static RigidTransform from_axis_angle(const Vec3& axis, double radians,
                                        const Vec3& translation = {});

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const;
  Vec3 operator()(const Vec3& p) const { return apply(p); }

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Vec3 translation_{};
};

/// apply(compose(a, b), p) == apply(a, apply(b, p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

/// Angle of the relative rotation a^T b, in radians.
double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

/// Least-squares proper rigid transform mapping src onto dst (Kabsch, no scale).
/// Throws TooFewPoints (< 3 pairs), LengthMismatch, DegenerateConfiguration (collinear src).
RigidTransform solve_rigid_transform(std::span<const Vec3> src, std::span<const Vec3> dst);

/// RMS of |apply(t, src_i) - dst_i|. Throws LengthMismatch.
double calibration_residual(const RigidTransform& t, std::span<const Vec3> src,
                            std::span<const Vec3> dst);

struct PointPair {
  Vec3 src;
  Vec3 dst;
  friend bool operator==(const PointPair&, const PointPair&) = default;
};

/// `sx,sy,sz,dx,dy,dz` per line, `#` comments.
std::vector<PointPair> read_calibration_csv(std::istream& in);

}  // namespace bioholo
