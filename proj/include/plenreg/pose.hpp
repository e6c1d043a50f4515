#pragma once

// Frame-labeled rigid transforms.
//
// A Pose with parent P and child C maps coordinates expressed in C into P:
//
//   x_P = R * x_C + t
//
// Composition a * b is only defined when a.child() == b.parent(). Labels are
// checked at runtime so pose chains can be assembled from configuration files.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "plenreg/errors.hpp"

namespace plenreg {

class FrameId {
 public:
  FrameId() = default;
  explicit FrameId(std::string label) : label_(std::move(label)) {
    if (label_.empty()) {
      fail(ErrorCode::InvalidArgument, "frame label must not be empty");
    }
  }
  FrameId(const char* label) : FrameId(std::string(label)) {}

  const std::string& label() const { return label_; }
  bool empty() const { return label_.empty(); }

  friend bool operator==(const FrameId&, const FrameId&) = default;
  friend std::ostream& operator<<(std::ostream& os, const FrameId& f) {
    return os << f.label_;
  }

 private:
  std::string label_;
};

template <typename T>
constexpr T rotation_tolerance() {
  if constexpr (std::is_same_v<T, double>) {
    return T(1e-9);
  } else {
    return T(100) * std::sqrt(std::numeric_limits<T>::epsilon());
  }
}

template <typename T>
constexpr T kPi = T(3.14159265358979323846264338327950288);

template <typename T>
constexpr T deg2rad(T deg) {
  return deg * kPi<T> / T(180);
}
template <typename T>
constexpr T rad2deg(T rad) {
  return rad * T(180) / kPi<T>;
}

template <typename Derived>
bool is_rotation(const Eigen::MatrixBase<Derived>& R,
                 typename Derived::Scalar tol =
                     rotation_tolerance<typename Derived::Scalar>()) {
  using T = typename Derived::Scalar;
  if (!R.allFinite()) return false;
  const Eigen::Matrix<T, 3, 3> M = R;
  return (M.transpose() * M - Eigen::Matrix<T, 3, 3>::Identity()).norm() < tol &&
         std::abs(M.determinant() - T(1)) < tol;
}

// Closest rotation in the Frobenius sense.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> project_to_rotation(
    const Eigen::MatrixBase<Derived>& M) {
  using T = typename Derived::Scalar;
  Eigen::JacobiSVD<Eigen::Matrix<T, 3, 3>> svd(
      M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix<T, 3, 3> D = Eigen::Matrix<T, 3, 3>::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < T(0)) {
    D(2, 2) = T(-1);
  }
  return svd.matrixU() * D * svd.matrixV().transpose();
}

template <typename T>
Eigen::Matrix<T, 3, 3> rotation_from_axis_angle(
    const Eigen::Matrix<T, 3, 1>& axis, T angle_rad) {
  return Eigen::AngleAxis<T>(angle_rad, axis.normalized()).toRotationMatrix();
}

// Exponential map of so(3); w is the rotation vector (axis * angle).
template <typename T>
Eigen::Matrix<T, 3, 3> so3_exp(const Eigen::Matrix<T, 3, 1>& w) {
  const T theta = w.norm();
  if (theta < T(1e-12)) {
    Eigen::Matrix<T, 3, 3> W;
    W << T(0), -w.z(), w.y(), w.z(), T(0), -w.x(), -w.y(), w.x(), T(0);
    return Eigen::Matrix<T, 3, 3>::Identity() + W;
  }
  return Eigen::AngleAxis<T>(theta, w / theta).toRotationMatrix();
}

template <typename T>
Eigen::Matrix<T, 3, 1> so3_log(const Eigen::Matrix<T, 3, 3>& R) {
  const Eigen::AngleAxis<T> aa(R);
  return aa.axis() * aa.angle();
}

template <typename T>
Eigen::Matrix<T, 3, 3> skew(const Eigen::Matrix<T, 3, 1>& v) {
  Eigen::Matrix<T, 3, 3> S;
  S << T(0), -v.z(), v.y(), v.z(), T(0), -v.x(), -v.y(), v.x(), T(0);
  return S;
}

// Geodesic angle of a rotation matrix in degrees, in [0, 180].
template <typename Derived>
typename Derived::Scalar rotation_angle_deg(const Eigen::MatrixBase<Derived>& R) {
  using T = typename Derived::Scalar;
  // atan2 keeps full precision near 0 where acos of the trace does not.
  const T s = T(0.5) * Eigen::Matrix<T, 3, 1>(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0),
                                              R(1, 0) - R(0, 1)).norm();
  const T c = (R.trace() - T(1)) / T(2);
  return rad2deg(std::atan2(s, c));
}

template <typename T>
class Pose {
 public:
  using Scalar = T;
  using Matrix3 = Eigen::Matrix<T, 3, 3>;
  using Matrix4 = Eigen::Matrix<T, 4, 4>;
  using Vector3 = Eigen::Matrix<T, 3, 1>;

  Pose(FrameId parent, FrameId child, const Matrix3& rotation,
       const Vector3& translation)
      : parent_(std::move(parent)),
        child_(std::move(child)),
        rotation_(rotation),
        translation_(translation) {
    if (parent_.empty() || child_.empty()) {
      fail(ErrorCode::InvalidArgument, "pose frames must be labeled");
    }
    if (!is_rotation(rotation_)) {
      fail(ErrorCode::InvalidArgument, "pose rotation is not in SO(3)");
    }
    if (!translation_.allFinite()) {
      fail(ErrorCode::InvalidArgument, "pose translation is not finite");
    }
  }

  static Pose Identity(FrameId parent, FrameId child) {
    return Pose(std::move(parent), std::move(child), Matrix3::Identity(),
                Vector3::Zero());
  }

  // Accepts a homogeneous matrix whose last row is [0 0 0 1].
  static Pose FromMatrix(FrameId parent, FrameId child, const Matrix4& H) {
    if (!H.row(3).isApprox(Eigen::Matrix<T, 1, 4>(0, 0, 0, 1))) {
      fail(ErrorCode::InvalidArgument, "homogeneous matrix has invalid last row");
    }
    return Pose(std::move(parent), std::move(child), H.template topLeftCorner<3, 3>(),
                H.template topRightCorner<3, 1>());
  }

  const FrameId& parent() const { return parent_; }
  const FrameId& child() const { return child_; }
  const Matrix3& rotation() const { return rotation_; }
  const Vector3& translation() const { return translation_; }

  Matrix4 matrix() const {
    Matrix4 H = Matrix4::Identity();
    H.template topLeftCorner<3, 3>() = rotation_;
    H.template topRightCorner<3, 1>() = translation_;
    return H;
  }

  // Maps a point from child coordinates into parent coordinates.
  template <typename Derived>
  Vector3 operator*(const Eigen::MatrixBase<Derived>& x_child) const {
    return rotation_ * x_child + translation_;
  }

  Pose relabeled(FrameId parent, FrameId child) const {
    return Pose(std::move(parent), std::move(child), rotation_, translation_);
  }

  template <typename U>
  Pose<U> cast() const {
    return Pose<U>(parent_, child_, project_to_rotation(rotation_.template cast<U>()),
                   translation_.template cast<U>());
  }

 private:
  FrameId parent_;
  FrameId child_;
  Matrix3 rotation_;
  Vector3 translation_;
};

using Posed = Pose<double>;

template <typename T>
Pose<T> compose(const Pose<T>& a, const Pose<T>& b) {
  if (!(a.child() == b.parent())) {
    fail(ErrorCode::FrameMismatch, "cannot compose " + a.parent().label() + "<-" +
                                       a.child().label() + " with " +
                                       b.parent().label() + "<-" + b.child().label());
  }
  return Pose<T>(a.parent(), b.child(), a.rotation() * b.rotation(),
                 a.rotation() * b.translation() + a.translation());
}

template <typename T>
Pose<T> operator*(const Pose<T>& a, const Pose<T>& b) {
  return compose(a, b);
}

template <typename T>
Pose<T> inverse(const Pose<T>& p) {
  const typename Pose<T>::Matrix3 Rt = p.rotation().transpose();
  return Pose<T>(p.child(), p.parent(), Rt, -Rt * p.translation());
}

template <typename T>
void require_same_frames(const Pose<T>& a, const Pose<T>& b) {
  if (!(a.parent() == b.parent()) || !(a.child() == b.child())) {
    fail(ErrorCode::FrameMismatch,
         "poses are not comparable: " + a.parent().label() + "<-" + a.child().label() +
             " vs " + b.parent().label() + "<-" + b.child().label());
  }
}

// Geodesic angle between the two rotations, degrees.
template <typename T>
T rotation_angle(const Pose<T>& a, const Pose<T>& b) {
  require_same_frames(a, b);
  return rotation_angle_deg(a.rotation() * b.rotation().transpose());
}

template <typename T>
T translation_error(const Pose<T>& a, const Pose<T>& b) {
  require_same_frames(a, b);
  return (a.translation() - b.translation()).norm();
}

template <typename T>
struct PointCloud {
  Eigen::Matrix<T, 3, Eigen::Dynamic> points;
  FrameId frame;

  Eigen::Index size() const { return points.cols(); }
};

using PointCloudd = PointCloud<double>;

struct IndexPair {
  int src = 0;
  int dst = 0;
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

// Least-squares rigid transform (R, t) with dst ~ R * src + t over aligned
// columns. Closed-form SVD solution with a reflection guard. Throws
// DegenerateConfiguration for fewer than 3 points or (near) collinear input.
template <typename DerivedA, typename DerivedB>
RigidTransform fit_rigid(const Eigen::MatrixBase<DerivedA>& src,
                         const Eigen::MatrixBase<DerivedB>& dst,
                         double collinearity_ratio = 1e-6) {
  const Eigen::Index n = src.cols();
  if (n < 3 || dst.cols() != n) {
    fail(ErrorCode::DegenerateConfiguration,
         "rigid fit needs at least 3 aligned correspondences");
  }
  const Eigen::Vector3d mu_src = src.rowwise().mean();
  const Eigen::Vector3d mu_dst = dst.rowwise().mean();
  const Eigen::Matrix3Xd a = src.colwise() - mu_src;
  const Eigen::Matrix3Xd b = dst.colwise() - mu_dst;

  for (const Eigen::Matrix3Xd* centered : {&a, &b}) {
    const Eigen::Vector3d s =
        Eigen::JacobiSVD<Eigen::Matrix3d>(*centered * centered->transpose())
            .singularValues()
            .cwiseSqrt();
    if (!(s(0) > 0.0) || s(1) / s(0) < collinearity_ratio) {
      fail(ErrorCode::DegenerateConfiguration, "correspondences are collinear");
    }
  }

  const Eigen::Matrix3d cov = b * a.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d S = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    S(2, 2) = -1.0;
  }
  RigidTransform out;
  out.rotation = svd.matrixU() * S * svd.matrixV().transpose();
  out.translation = mu_dst - out.rotation * mu_src;
  return out;
}

// Rigid pose mapping src-frame coordinates onto dst-frame coordinates
// (parent = dst.frame, child = src.frame).
Posed fit_rigid_umeyama(const PointCloudd& src, const PointCloudd& dst,
                        const std::vector<IndexPair>& pairs);

}  // namespace plenreg
