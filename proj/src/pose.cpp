#include "plenreg/pose.hpp"

namespace plenreg {

Posed fit_rigid_umeyama(const PointCloudd& src, const PointCloudd& dst,
                        const std::vector<IndexPair>& pairs) {
  Eigen::Matrix3Xd a(3, static_cast<Eigen::Index>(pairs.size()));
  Eigen::Matrix3Xd b(3, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    if (i < 0 || i >= src.size() || j < 0 || j >= dst.size()) {
      fail(ErrorCode::IndexOutOfRange, "correspondence index out of range");
    }
    a.col(static_cast<Eigen::Index>(k)) = src.points.col(i);
    b.col(static_cast<Eigen::Index>(k)) = dst.points.col(j);
  }
  const RigidTransform fit = fit_rigid(a, b);
  return Posed(dst.frame, src.frame, fit.rotation, fit.translation);
}

}  // namespace plenreg
