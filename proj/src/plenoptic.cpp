#include "plenreg/plenoptic.hpp"

#include <string>

namespace plenreg {

void PlenopticIntrinsics::validate() const {
  auto bad = [](const std::string& what) {
    fail(ErrorCode::InvalidArgument, "invalid intrinsics: " + what);
  };
  if (!(B > 0.0)) bad("B must be positive");
  if (!(b_L0 > 0.0)) bad("b_L0 must be positive");
  if (!(f_px > 0.0)) bad("f_px must be positive");
  if (width <= 0 || height <= 0) bad("image size must be positive");
  if (!(c_x >= 0.0 && c_x < width)) bad("c_x outside the image");
  if (!(c_y >= 0.0 && c_y < height)) bad("c_y outside the image");
}

PixelPoint undistort(const PixelPoint& distorted, const DistortionModel& d,
                     const PlenopticIntrinsics& k, const UndistortOptions& options) {
  if (!distorted.allFinite()) {
    fail(ErrorCode::InvalidArgument, "cannot undistort a non-finite pixel");
  }
  if (d.is_identity()) return distorted;

  const Eigen::Vector2d target((distorted.x() - k.c_x) / k.f_px,
                               (distorted.y() - k.c_y) / k.f_px);
  Eigen::Vector2d p = target;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double x = p.x();
    const double y = p.y();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (d.k1 + r2 * (d.k2 + r2 * d.k3));
    const double dx = 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x);
    const double dy = d.p1 * (r2 + 2.0 * y * y) + 2.0 * d.p2 * x * y;
    const Eigen::Vector2d next((target.x() - dx) / radial, (target.y() - dy) / radial);
    const double step_px = (next - p).norm() * k.f_px;
    p = next;
    if (step_px < options.step_tolerance_px) break;
  }
  const PixelPoint out(p.x() * k.f_px + k.c_x, p.y() * k.f_px + k.c_y);
  if ((distort(out, d, k) - distorted).norm() > options.residual_tolerance_px) {
    fail(ErrorCode::NoConvergence, "distortion inversion did not converge");
  }
  return out;
}

}  // namespace plenreg
