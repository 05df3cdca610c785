#pragma once

#include <random>

#include <Eigen/Geometry>
#include <doctest.h>

#include "bioholo/error.hpp"
#include "bioholo/geometry.hpp"

namespace testing {

inline bioholo::Vec3 random_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng), d(rng), d(rng)};
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline bool close(const bioholo::Vec3& a, const bioholo::Vec3& b, double tol) {
  return bioholo::distance(a, b) <= tol;
}

template <typename F>
bioholo::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const bioholo::Error& e) {
    return e.code();
  }
  FAIL("expected a bioholo::Error");
  return bioholo::ErrorCode::InvalidArgument;
}

}  // namespace testing
