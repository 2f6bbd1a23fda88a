#pragma once

#include <Eigen/Dense>

namespace maglat {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using BVector = Eigen::Vector3d;

/// Axis-aligned box.
struct Box {
  Vec3 lo;
  Vec3 hi;

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
};

}  // namespace maglat
