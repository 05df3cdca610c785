#include "bioholo/geometry.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "bioholo/csv.hpp"
#include "bioholo/error.hpp"

namespace bioholo {

namespace {

constexpr double kRotationTolerance = 1e-9;
constexpr double kParallelThreshold = 1e-6;
constexpr double kCollinearRatio = 1e-12;

void require_matched(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(src.size()) + " source points vs " +
                                               std::to_string(dst.size()) + " destination points");
  }
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 sum{};
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

}  // namespace

Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero vector");
  return v / n;
}

std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

std::pair<Vec3, Vec3> plane_basis(const Vec3& normal) {
  const Vec3 c = cross(normal, Vec3{0.0, 0.0, 1.0});
  const Vec3 u = norm(c) < kParallelThreshold ? Vec3{1.0, 0.0, 0.0} : normalized(c);
  return {u, cross(normal, u)};
}

std::string_view to_string(FrameId frame) {
  switch (frame) {
    case FrameId::Device: return "device";
    case FrameId::Headset: return "headset";
    case FrameId::World: return "world";
  }
  return "device";
}

FrameId frame_from_string(std::string_view name) {
  if (name == "device") return FrameId::Device;
  if (name == "headset") return FrameId::Headset;
  if (name == "world") return FrameId::World;
  throw Error(ErrorCode::InvalidArgument, "unknown frame '" + std::string(name) + "'");
}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation_.allFinite() || !is_finite(translation_)) {
    throw Error(ErrorCode::InvalidArgument, "transform has non-finite entries");
  }
  const double ortho = (rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity()).norm();
  if (ortho > kRotationTolerance) {
    throw Error(ErrorCode::InvalidArgument, "rotation is not orthonormal");
  }
  if (std::abs(rotation_.determinant() - 1.0) > kRotationTolerance) {
    throw Error(ErrorCode::InvalidArgument, "rotation determinant is not +1");
  }
}

RigidTransform RigidTransform::from_translation(const Vec3& t) {
  return RigidTransform(Eigen::Matrix3d::Identity(), t);
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double radians,
                                               const Vec3& translation) {
  const Eigen::AngleAxisd aa(radians, to_eigen(normalized(axis)));
  return RigidTransform(aa.toRotationMatrix(), translation);
}

Vec3 RigidTransform::apply(const Vec3& p) const {
  return from_eigen(rotation_ * to_eigen(p)) + translation_;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  const Eigen::Matrix3d r = a.rotation() * b.rotation();
  const Vec3 t = a.apply(b.translation());
  return RigidTransform(r, t);
}

RigidTransform invert(const RigidTransform& t) {
  const Eigen::Matrix3d rt = t.rotation().transpose();
  return RigidTransform(rt, from_eigen(-(rt * to_eigen(t.translation()))));
}

double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::AngleAxisd rel(Eigen::Matrix3d(a.transpose() * b));
  return std::abs(rel.angle());
}

RigidTransform solve_rigid_transform(std::span<const Vec3> src, std::span<const Vec3> dst) {
  require_matched(src, dst);
  if (src.size() < 3) {
    throw Error(ErrorCode::TooFewPoints,
                "need at least 3 point pairs, got " + std::to_string(src.size()));
  }
  const Vec3 cs = centroid(src);
  const Vec3 cd = centroid(dst);

  Eigen::MatrixXd centered(static_cast<Eigen::Index>(src.size()), 3);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d a = to_eigen(src[i] - cs);
    const Eigen::Vector3d b = to_eigen(dst[i] - cd);
    centered.row(static_cast<Eigen::Index>(i)) = a.transpose();
    cov += a * b.transpose();
  }

  const Eigen::Vector3d spread = Eigen::JacobiSVD<Eigen::MatrixXd>(centered).singularValues();
  if (!(spread(0) > 0.0) || spread(1) < kCollinearRatio * spread(0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "source points are collinear or coincident");
  }

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  Eigen::Matrix3d r = v * d * u.transpose();

  // Re-orthonormalize to wash out SVD rounding before validation.
  const Eigen::JacobiSVD<Eigen::Matrix3d> clean(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = clean.matrixU() * clean.matrixV().transpose();

  const Vec3 t = cd - from_eigen(r * to_eigen(cs));
  return RigidTransform(r, t);
}

double calibration_residual(const RigidTransform& t, std::span<const Vec3> src,
                            std::span<const Vec3> dst) {
  require_matched(src, dst);
  if (src.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Vec3 e = t.apply(src[i]) - dst[i];
    sum += dot(e, e);
  }
  return std::sqrt(sum / static_cast<double>(src.size()));
}

std::vector<PointPair> read_calibration_csv(std::istream& in) {
  std::vector<PointPair> pairs;
  for (const auto& r : csv::read_numeric(in, 6)) {
    pairs.push_back({{r[0], r[1], r[2]}, {r[3], r[4], r[5]}});
  }
  return pairs;
}

}  // namespace bioholo
