// Shared value types: vectors, boxes, errors.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace geoforge {

/// Rounds through binary32. Out of line on purpose: GCC 11 at -O3 has been
/// seen folding the double -> float -> double round trip away inside
/// vectorized code.
double round_to_float(double v);

using Vec3 = Eigen::Vector3d;

/// Base class for every error raised by the toolkit.
class GeoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public GeoError {
 public:
  using GeoError::GeoError;
};

class InvalidArgument : public GeoError {
 public:
  using GeoError::GeoError;
};

/// Raised when a cooperative budget (deadline) expires mid-computation.
class BudgetExceeded : public GeoError {
 public:
  using GeoError::GeoError;
};

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (lo.array() > hi.array()).any(); }

  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }

  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  bool contains(const Aabb& b) const {
    return (b.lo.array() >= lo.array()).all() && (b.hi.array() <= hi.array()).all();
  }

  double surface_area() const {
    if (empty()) return 0.0;
    const Vec3 e = extent();
    return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
  }

  // Squared distance from p to the box (0 inside).
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(Vec3::Zero());
    return d.squaredNorm();
  }
};

}  // namespace geoforge
