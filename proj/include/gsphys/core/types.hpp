#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gsphys {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Quaternion stored as (w, x, y, z); not necessarily unit length.
using QuatWXYZ = Eigen::Vector4d;

}  // namespace gsphys
