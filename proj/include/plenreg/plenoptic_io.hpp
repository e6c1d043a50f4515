#pragma once

#include "plenreg/io.hpp"
#include "plenreg/plenoptic.hpp"

namespace plenreg {

struct CameraModel {
  PlenopticIntrinsics intrinsics;
  DistortionModel distortion;
};

// {B, b_L0, c_x, c_y, f_px, pixel_size_um, width, height,
//  distortion: {k1, k2, k3, p1, p2}}
// When f_px is absent it is derived from "focal_length_mm" and pixel_size_um.
CameraModel camera_model_from_json(const json& j);
json camera_model_to_json(const CameraModel& model);

}  // namespace plenreg
