#pragma once

#include <Eigen/Core>

namespace acflow {

using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

}  // namespace acflow
