#pragma once

// Point-cloud registration: descriptor matching between the two feature
// clouds, RANSAC over 3-point rigid fits, and the chain that turns the
// cloud-to-cloud transform into the inter-camera extrinsic.

#include <cstdint>
#include <string>

#include "plenreg/feature_match.hpp"
#include "plenreg/registration.hpp"

namespace plenreg {

struct Ransac3dParams {
  int max_iterations = 2000;
  double inlier_threshold = 10.0;  // mm
  int min_inliers = 10;
  std::uint64_t seed = 0;
  double confidence = 0.999;
  double keep_ratio = 0.8;
  unsigned threads = 1;

  void validate() const;
};

// RANSAC rigid fit over given correspondences (src index -> dst index). The
// resulting pose maps src.frame coordinates into dst.frame.
// Errors: InsufficientMatches (< 3), NoConsensus.
RegistrationResult estimate_rigid_ransac(const PointCloudd& src, const PointCloudd& dst,
                                         const std::vector<IndexPair>& correspondences,
                                         const Ransac3dParams& params);

// Matches cloud0 against cloudX and estimates the transform taking cloud0
// coordinates into cloudX coordinates (parent cloudX.frame, child cloud0.frame).
RegistrationResult register_ransac3d(const FeatureCloud& cloud0, const FeatureCloud& cloudX,
                                     const Ransac3dParams& params);

// wx_to_cx * w0_to_wx * inverse(w0_to_c0): with inputs labelled CX<-WX,
// WX<-W0 and C0<-W0 the result is CX<-C0. Frame labels are checked.
Posed chain_extrinsic_ransac(const Posed& wx_to_cx, const Posed& w0_to_wx,
                             const Posed& w0_to_c0);

// Human-readable frame chain, e.g. "CX<-WX * WX<-W0 * inv(C0<-W0) = CX<-C0".
std::string describe_ransac_chain(const Posed& wx_to_cx, const Posed& w0_to_wx,
                                  const Posed& w0_to_c0);

}  // namespace plenreg
