#pragma once

#include <string>
#include <vector>

#include "plenreg/io.hpp"
#include "plenreg/pose.hpp"

namespace plenreg {

// Output of either registration method. inlier_indices refer to
// correspondences; rms_residual is in mm for 3D-3D and px for 2D-3D and is
// taken over the inliers only.
struct RegistrationResult {
  Posed pose;
  std::vector<IndexPair> correspondences;
  std::vector<int> inlier_indices;
  double rms_residual = 0.0;
  int iterations_used = 0;
};

json registration_to_json(const RegistrationResult& result);

}  // namespace plenreg
