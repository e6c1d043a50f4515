#include "plenreg/pose_io.hpp"

namespace plenreg {

namespace {

std::vector<double> numbers(const json& j, const char* key, std::size_t count) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != count) {
    fail(ErrorCode::ConfigError, std::string("pose field '") + key + "' must hold " +
                                     std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) {
      fail(ErrorCode::ConfigError, std::string("pose field '") + key + "' is not numeric");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::string label(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    fail(ErrorCode::ConfigError, std::string("pose is missing '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

Eigen::Matrix3d checked_rotation(const Eigen::Matrix3d& R) {
  if (is_rotation(R)) return R;
  if (is_rotation(R, 1e-6)) return project_to_rotation(R);
  fail(ErrorCode::ConfigError, "pose rotation is not orthonormal");
}

}  // namespace

json pose_to_json(const Posed& pose) {
  json j;
  j["parent"] = pose.parent().label();
  j["child"] = pose.child().label();
  std::vector<double> r;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r.push_back(pose.rotation()(row, col));
  }
  j["rotation"] = r;
  j["translation"] = {pose.translation().x(), pose.translation().y(),
                      pose.translation().z()};
  return j;
}

Posed pose_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "pose must be a JSON object");
  const FrameId parent(label(j, "parent"));
  const FrameId child(label(j, "child"));
  if (j.contains("matrix")) {
    const auto m = numbers(j, "matrix", 16);
    const Eigen::Matrix4d H = Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>>(m.data());
    if ((H.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-12) {
      fail(ErrorCode::ConfigError, "homogeneous matrix has invalid last row");
    }
    return Posed(parent, child, checked_rotation(H.topLeftCorner<3, 3>()),
                 H.topRightCorner<3, 1>());
  }
  const auto t = numbers(j, "translation", 3);
  const Eigen::Vector3d translation(t[0], t[1], t[2]);
  if (j.contains("quaternion")) {
    const auto q = numbers(j, "quaternion", 4);
    const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
    if (std::abs(quat.norm() - 1.0) > 1e-6) {
      fail(ErrorCode::ConfigError, "pose quaternion is not unit length");
    }
    return Posed(parent, child, quat.normalized().toRotationMatrix(), translation);
  }
  const auto r = numbers(j, "rotation", 9);
  const Eigen::Matrix3d R = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(r.data());
  return Posed(parent, child, checked_rotation(R), translation);
}

Eigen::Vector4d quaternion_wxyz(const Eigen::Matrix3d& R) {
  Eigen::Quaterniond q(R);
  if (q.w() < 0) q.coeffs() *= -1.0;
  return {q.w(), q.x(), q.y(), q.z()};
}

}  // namespace plenreg
