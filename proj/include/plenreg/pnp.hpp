#pragma once

// Single-image registration against the reference point cloud.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plenreg/feature_match.hpp"
#include "plenreg/plenoptic.hpp"
#include "plenreg/registration.hpp"

namespace plenreg {

struct PnpParams {
  int max_iterations = 2000;
  double inlier_threshold = 2.0;  // px, reprojection error
  int min_inliers = 10;
  double confidence = 0.999;
  std::uint64_t seed = 0;
  double fm_threshold = 2.0;  // px, Sampson distance
  int lm_max_iters = 100;
  double lm_tolerance = 1e-10;  // relative cost decrease
  int knn_k = 2;
  unsigned threads = 1;

  void validate() const;
};

// Structure-of-arrays 2D-3D correspondences: pixels on the corrected image
// and points of the reference cloud (mm).
struct Correspondences2d3d {
  Eigen::Matrix2Xd pixels;
  Eigen::Matrix3Xd world;

  Eigen::Index size() const { return pixels.cols(); }
  Correspondences2d3d subset(const std::vector<int>& idx) const;
};

// Linear resection from >= 6 correspondences on normalized coordinates,
// followed by projection of the left 3x3 block onto SO(3). Returns
// std::nullopt for (near) coplanar or otherwise ill-conditioned input
// (condition number above max_condition).
std::optional<RigidTransform> pose_dlt(const Correspondences2d3d& corrs,
                                       const PlenopticIntrinsics& k,
                                       double max_condition = 1e8);

// Reprojection residual (projected - observed) of one correspondence and its
// Jacobian with respect to the left increment [w, dt] applied as
//   R <- exp(w) R,   t <- t + dt.
struct ReprojectionTerm {
  Eigen::Vector2d residual;
  Eigen::Matrix<double, 2, 6> jacobian;
};
ReprojectionTerm reprojection_term(const Posed& camera_from_world, const Eigen::Vector3d& world,
                                   const Eigen::Vector2d& observed, const PlenopticIntrinsics& k);

// Applies the increment [w, dt] with the convention above.
Posed apply_increment(const Posed& pose, const Eigen::Matrix<double, 6, 1>& delta);

// Errors: InsufficientCorrespondences (< 6), NoConsensus. The pose maps
// world (reference cloud) coordinates into the camera frame.
RegistrationResult pnp_ransac(const Correspondences2d3d& corrs, const PlenopticIntrinsics& k,
                              const PnpParams& params, const FrameId& camera_frame,
                              const FrameId& world_frame);

struct LmSummary {
  Posed pose;
  bool converged = false;
  int iterations = 0;
  std::vector<double> cost_history;  // cost after every accepted step, starts with the initial cost
  double initial_rms = 0.0;
  double final_rms = 0.0;
};

struct LmOptions {
  int max_iterations = 100;
  double relative_tolerance = 1e-10;
  double initial_lambda = 1e-3;
};

// Levenberg-Marquardt on the summed squared reprojection error. Never
// throws for lack of convergence: the best pose found is returned with
// converged == false.
LmSummary refine_lm(const Posed& initial, const Correspondences2d3d& inliers,
                    const PlenopticIntrinsics& k, const LmOptions& options = {});

// w0_to_cx * inverse(w0_to_c0): with inputs CX<-W0 and C0<-W0 the result is CX<-C0.
Posed chain_extrinsic_pnp(const Posed& w0_to_cx, const Posed& w0_to_c0);

// Reference camera: the calibrated camera that produced the cloud.
struct ReferenceCamera {
  Posed world_to_camera;  // C0 <- W0
  PlenopticIntrinsics intrinsics;
};

struct PnpDiagnostics {
  int keypoints = 0;
  int matches = 0;
  int fm_inliers = 0;
  bool fm_applied = false;
  std::string fm_note;
  int pnp_inliers = 0;
  int pnp_iterations = 0;
  int lm_iterations = 0;
  bool lm_converged = false;
  double lm_initial_rms = 0.0;
  double lm_final_rms = 0.0;
  int final_inliers = 0;
};

struct PnpPipelineResult {
  RegistrationResult registration;  // pose: CX <- C0; correspondences: (cloud idx, image idx)
  Posed camera_from_world;          // CX <- W0 after refinement
  PnpDiagnostics diagnostics;
};

json pnp_result_to_json(const PnpPipelineResult& result);

// undistort -> (virtual keypoints) common-plane projection -> mutual kNN
// matching -> fundamental matrix filter against the reference view -> RANSAC
// PnP -> LM -> chaining with the reference camera. Stage errors are rethrown
// with the stage name attached.
PnpPipelineResult register_pnp_pipeline(const FeatureImage& image, const FeatureCloud& cloud0,
                                        const PlenopticIntrinsics& k, const DistortionModel& d,
                                        const ReferenceCamera& reference, const PnpParams& params,
                                        const FrameId& camera_frame = "CX");

}  // namespace plenreg
