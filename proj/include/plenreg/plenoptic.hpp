#pragma once

// Focused plenoptic camera model: lens distortion, central projection of
// virtual-depth points onto the common image plane, and the pinhole model of
// the corrected view.

#include <Eigen/Core>

#include <cmath>

#include "plenreg/errors.hpp"
#include "plenreg/pose.hpp"

namespace plenreg {

using PixelPoint = Eigen::Vector2d;

struct PlenopticIntrinsics {
  double B = 0.0;      // MLA to sensor, mm
  double b_L0 = 0.0;   // main lens to MLA, mm
  double c_x = 0.0;    // principal point, px
  double c_y = 0.0;
  double f_px = 0.0;   // focal length of the corrected pinhole view, px
  double pixel_size_um = 0.0;
  int width = 0;
  int height = 0;

  // Throws InvalidArgument when an invariant does not hold.
  void validate() const;
};

// Fallback focal length when the calibration does not provide f_px.
inline double focal_length_px(double focal_length_mm, double pixel_size_um) {
  return focal_length_mm * 1000.0 / pixel_size_um;
}

// Brown-Conrady model on normalized coordinates (u - c) / f_px.
struct DistortionModel {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  bool is_identity() const {
    return k1 == 0.0 && k2 == 0.0 && k3 == 0.0 && p1 == 0.0 && p2 == 0.0;
  }
};

template <typename T>
struct VirtualPoint {
  Eigen::Matrix<T, 2, 1> xy;  // position on the virtual image, px
  T depth;                    // virtual depth v
};

// x_proj = (x_V - c_x) / (v B + b_L0) * (2 B + b_L0) + c_x, same for y.
template <typename T>
Eigen::Matrix<T, 2, 1> project_to_common_plane(const VirtualPoint<T>& p,
                                               const PlenopticIntrinsics& k) {
  if (!(p.depth > T(0))) {
    fail(ErrorCode::InvalidDepth, "virtual depth must be positive");
  }
  const T denom = p.depth * T(k.B) + T(k.b_L0);
  if (denom == T(0)) {
    fail(ErrorCode::InvalidDepth, "projection denominator vanishes");
  }
  const T scale = (T(2) * T(k.B) + T(k.b_L0)) / denom;
  if (scale == T(1)) return p.xy;
  const Eigen::Matrix<T, 2, 1> c(T(k.c_x), T(k.c_y));
  return (p.xy - c) * scale + c;
}

// Inverse of project_to_common_plane for a known virtual depth.
template <typename T>
Eigen::Matrix<T, 2, 1> virtual_from_common_plane(const Eigen::Matrix<T, 2, 1>& projected,
                                                 T depth, const PlenopticIntrinsics& k) {
  if (!(depth > T(0))) {
    fail(ErrorCode::InvalidDepth, "virtual depth must be positive");
  }
  const T scale = (depth * T(k.B) + T(k.b_L0)) / (T(2) * T(k.B) + T(k.b_L0));
  const Eigen::Matrix<T, 2, 1> c(T(k.c_x), T(k.c_y));
  return (projected - c) * scale + c;
}

template <typename T>
Eigen::Matrix<T, 2, 1> distort(const Eigen::Matrix<T, 2, 1>& undistorted,
                               const DistortionModel& d, const PlenopticIntrinsics& k) {
  const T x = (undistorted.x() - T(k.c_x)) / T(k.f_px);
  const T y = (undistorted.y() - T(k.c_y)) / T(k.f_px);
  const T r2 = x * x + y * y;
  const T radial = T(1) + r2 * (T(d.k1) + r2 * (T(d.k2) + r2 * T(d.k3)));
  const T xd = x * radial + T(2) * T(d.p1) * x * y + T(d.p2) * (r2 + T(2) * x * x);
  const T yd = y * radial + T(d.p1) * (r2 + T(2) * y * y) + T(2) * T(d.p2) * x * y;
  return {xd * T(k.f_px) + T(k.c_x), yd * T(k.f_px) + T(k.c_y)};
}

struct UndistortOptions {
  int max_iterations = 20;
  double step_tolerance_px = 1e-8;
  double residual_tolerance_px = 1e-6;
};

// Fixed-point inversion of distort(). Throws NoConvergence when the forward
// model does not reproduce the input within residual_tolerance_px.
PixelPoint undistort(const PixelPoint& distorted, const DistortionModel& d,
                     const PlenopticIntrinsics& k, const UndistortOptions& options = {});

// Projects a world point through pose (camera <- world) with the pinhole
// model of the corrected view.
template <typename T>
Eigen::Matrix<T, 2, 1> project_pinhole(const Eigen::Matrix<T, 3, 1>& world_point,
                                       const Pose<T>& camera_from_world,
                                       const PlenopticIntrinsics& k) {
  const Eigen::Matrix<T, 3, 1> pc = camera_from_world * world_point;
  if (!(pc.z() > T(0))) {
    fail(ErrorCode::BehindCamera, "point is behind the camera");
  }
  return {T(k.f_px) * pc.x() / pc.z() + T(k.c_x), T(k.f_px) * pc.y() / pc.z() + T(k.c_y)};
}

}  // namespace plenreg
