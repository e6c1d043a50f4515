#pragma once

// Robust fundamental matrix estimation with the normalized 8-point algorithm.
// Convention: x_query^T F x_ref = 0.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace plenreg {

struct FundamentalOptions {
  double threshold_px = 2.0;  // on the Sampson (first-order geometric) distance
  int max_iterations = 2000;
  double confidence = 0.999;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct FundamentalResult {
  Eigen::Matrix3d F;
  std::vector<bool> inlier_mask;
  int inlier_count = 0;
  int iterations_used = 0;
};

// Similarity taking the points to zero centroid and mean distance sqrt(2).
Eigen::Matrix3d hartley_normalization(const Eigen::Matrix2Xd& points);

// Linear 8+-point estimate with Hartley normalization and rank-2
// enforcement; std::nullopt when the design matrix has a nullspace of
// dimension > 1.
std::optional<Eigen::Matrix3d> fundamental_linear(const Eigen::Matrix2Xd& ref,
                                                  const Eigen::Matrix2Xd& query);

// Square root of the Sampson error, px.
double sampson_distance(const Eigen::Matrix3d& F, const Eigen::Vector2d& ref,
                        const Eigen::Vector2d& query);

// Errors: InsufficientCorrespondences (< 8), DegenerateConfiguration.
FundamentalResult fundamental_8point_ransac(const Eigen::Matrix2Xd& ref,
                                            const Eigen::Matrix2Xd& query,
                                            const FundamentalOptions& options = {});

}  // namespace plenreg
