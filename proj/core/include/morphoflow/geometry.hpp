#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <limits>
#include <vector>

namespace morphoflow {

using Vec3 = Eigen::Vector3d;
using PointList = std::vector<Vec3>;

/// Axis-aligned box, used for bounding boxes and region-of-interest masks.
struct Box3 {
  Vec3 min{std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  bool empty() const { return (max.array() < min.array()).any(); }

  double diagonal() const { return empty() ? 0.0 : (max - min).norm(); }
};

inline Box3 bounding_box(const PointList& points) {
  Box3 box;
  for (const Vec3& p : points) box.expand(p);
  return box;
}

} // namespace morphoflow
