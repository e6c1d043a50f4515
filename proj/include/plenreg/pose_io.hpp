#pragma once

#include "plenreg/io.hpp"
#include "plenreg/pose.hpp"

namespace plenreg {

// {parent, child, rotation: 9 row-major, translation: 3}
json pose_to_json(const Posed& pose);

// Accepts the rotation/translation form, a 16-element row-major "matrix", or
// a "quaternion" [w, x, y, z] with "translation". Rotations that are within
// 1e-6 of SO(3) (limited-precision files) are projected onto it.
Posed pose_from_json(const json& j);

Eigen::Vector4d quaternion_wxyz(const Eigen::Matrix3d& R);

}  // namespace plenreg
