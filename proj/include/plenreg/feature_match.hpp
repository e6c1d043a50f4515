#pragma once

// Descriptor containers and brute-force L2 matching.

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "plenreg/pose.hpp"

namespace plenreg {

// One descriptor per row.
using DescriptorMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureCloud {
  Eigen::Matrix3Xd points;  // mm
  FrameId frame;
  DescriptorMatrix descriptors;

  Eigen::Index size() const { return points.cols(); }
  PointCloudd cloud() const { return {points, frame}; }
  void validate() const;
};

// Keypoints either live on the corrected image (depths empty) or on the
// virtual image with one virtual depth per keypoint, in which case the
// common-plane projection still has to be applied.
struct FeatureImage {
  Eigen::Matrix2Xd keypoints;  // px
  DescriptorMatrix descriptors;
  std::optional<Eigen::VectorXd> virtual_depths;

  Eigen::Index size() const { return keypoints.cols(); }
  void validate() const;
};

struct Match {
  int query_idx = 0;
  int train_idx = 0;
  double distance = 0.0;

  bool operator==(const Match&) const = default;
};

// Distance computed in double precision.
double descriptor_distance(const DescriptorMatrix& a, Eigen::Index i,
                           const DescriptorMatrix& b, Eigen::Index j);

// Nearest train descriptor for every query (ties go to the lowest train
// index), sorted by ascending distance and truncated to
// floor(keep_ratio * |query|) matches, at least one.
// Errors: DimensionMismatch, EmptySet, InvalidArgument (keep_ratio).
std::vector<Match> match_bruteforce_l2(const DescriptorMatrix& query,
                                       const DescriptorMatrix& train,
                                       double keep_ratio = 0.8, unsigned threads = 1);

// Mutual k-nearest-neighbour matching. A pair (i, j) survives when j is among
// the k nearest of i in b, i is among the k nearest of j in a, and each is
// the other's nearest such mutual partner. Sorted by query index.
std::vector<Match> match_knn_crosscheck(const DescriptorMatrix& a,
                                        const DescriptorMatrix& b, int k = 2,
                                        unsigned threads = 1);

}  // namespace plenreg
