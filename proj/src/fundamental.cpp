#include "plenreg/fundamental.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>

#include "plenreg/errors.hpp"
#include "plenreg/ransac.hpp"

namespace plenreg {

namespace {

constexpr int kSampleSize = 8;
constexpr double kNullspaceRatio = 1e-10;

}  // namespace

Eigen::Matrix3d hartley_normalization(const Eigen::Matrix2Xd& points) {
  const Eigen::Vector2d centroid = points.rowwise().mean();
  const double mean_dist = (points.colwise() - centroid).colwise().norm().mean();
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d T;
  T << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return T;
}

std::optional<Eigen::Matrix3d> fundamental_linear(const Eigen::Matrix2Xd& ref,
                                                  const Eigen::Matrix2Xd& query) {
  const Eigen::Index n = ref.cols();
  if (n < kSampleSize || query.cols() != n) return std::nullopt;
  const Eigen::Matrix3d T_ref = hartley_normalization(ref);
  const Eigen::Matrix3d T_query = hartley_normalization(query);

  Eigen::MatrixXd A(n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d x = T_ref * ref.col(i).homogeneous();
    const Eigen::Vector3d y = T_query * query.col(i).homogeneous();
    // y^T F x = 0, F row-major.
    A.row(i) << y(0) * x(0), y(0) * x(1), y(0) * x(2), y(1) * x(0), y(1) * x(1), y(1) * x(2),
        y(2) * x(0), y(2) * x(1), y(2) * x(2);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  // With exactly 8 rows the 9th singular value is implicitly zero.
  const double second_smallest = sv(7);
  if (!(sv(0) > 0.0) || second_smallest / sv(0) < kNullspaceRatio) return std::nullopt;

  const Eigen::VectorXd f = svd.matrixV().col(8);
  Eigen::Matrix3d Fn = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(f.data());
  Eigen::JacobiSVD<Eigen::Matrix3d> svd_f(Fn, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd_f.singularValues();
  s(2) = 0.0;
  Fn = svd_f.matrixU() * s.asDiagonal() * svd_f.matrixV().transpose();

  Eigen::Matrix3d F = T_query.transpose() * Fn * T_ref;
  const double norm = F.norm();
  if (!(norm > 0.0) || !F.allFinite()) return std::nullopt;
  return F / norm;
}

double sampson_distance(const Eigen::Matrix3d& F, const Eigen::Vector2d& ref,
                        const Eigen::Vector2d& query) {
  const Eigen::Vector3d x = ref.homogeneous();
  const Eigen::Vector3d y = query.homogeneous();
  const Eigen::Vector3d Fx = F * x;
  const Eigen::Vector3d Fty = F.transpose() * y;
  const double e = y.dot(Fx);
  const double denom = Fx.head<2>().squaredNorm() + Fty.head<2>().squaredNorm();
  if (denom <= 0.0) return std::abs(e) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::abs(e) / std::sqrt(denom);
}

FundamentalResult fundamental_8point_ransac(const Eigen::Matrix2Xd& ref,
                                            const Eigen::Matrix2Xd& query,
                                            const FundamentalOptions& options) {
  const int n = static_cast<int>(ref.cols());
  if (query.cols() != ref.cols()) {
    fail(ErrorCode::DimensionMismatch, "reference and query point counts differ");
  }
  if (n < kSampleSize) {
    fail(ErrorCode::InsufficientCorrespondences,
         "fundamental matrix needs at least 8 correspondences, got " + std::to_string(n));
  }

  auto solve = [&](std::span<const int> idx) -> std::optional<Eigen::Matrix3d> {
    Eigen::Matrix2Xd r(2, static_cast<Eigen::Index>(idx.size()));
    Eigen::Matrix2Xd q(2, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t s = 0; s < idx.size(); ++s) {
      r.col(static_cast<Eigen::Index>(s)) = ref.col(idx[s]);
      q.col(static_cast<Eigen::Index>(s)) = query.col(idx[s]);
    }
    return fundamental_linear(r, q);
  };
  auto score = [&](const Eigen::Matrix3d& F) {
    std::vector<int> in;
    for (int i = 0; i < n; ++i) {
      if (sampson_distance(F, ref.col(i), query.col(i)) <= options.threshold_px) in.push_back(i);
    }
    return in;
  };

  RansacOptions ro;
  ro.max_iterations = options.max_iterations;
  ro.confidence = options.confidence;
  ro.seed = options.seed;
  ro.threads = options.threads;
  auto outcome = run_ransac<Eigen::Matrix3d>(n, kSampleSize, ro, solve, score);
  if (!outcome.model) {
    fail(ErrorCode::DegenerateConfiguration, "no non-degenerate 8-point sample found");
  }

  Eigen::Matrix3d F = *outcome.model;
  std::vector<int> inliers = outcome.inliers;
  for (int r = 0; r < 10 && static_cast<int>(inliers.size()) >= kSampleSize; ++r) {
    auto refit = solve(inliers);
    if (!refit) break;
    auto next = score(*refit);
    if (next.size() < inliers.size()) break;
    F = *refit;
    const bool stable = next == inliers;
    inliers = std::move(next);
    if (stable) break;
  }

  FundamentalResult result{F, std::vector<bool>(static_cast<std::size_t>(n), false),
                           static_cast<int>(inliers.size()), outcome.iterations};
  for (int i : inliers) result.inlier_mask[static_cast<std::size_t>(i)] = true;
  return result;
}

}  // namespace plenreg
