#include "plenreg/registration_ransac3d.hpp"

#include <cmath>

#include "plenreg/pose_io.hpp"
#include "plenreg/ransac.hpp"

namespace plenreg {

namespace {

constexpr int kSampleSize = 3;
constexpr int kMaxRefits = 10;

std::string arrow(const Posed& p) { return p.parent().label() + "<-" + p.child().label(); }

}  // namespace

json registration_to_json(const RegistrationResult& result) {
  json pairs = json::array();
  for (const auto& c : result.correspondences) pairs.push_back({c.src, c.dst});
  return json{{"pose", pose_to_json(result.pose)},
              {"inlier_indices", result.inlier_indices},
              {"inlier_count", result.inlier_indices.size()},
              {"correspondence_count", result.correspondences.size()},
              {"correspondences", pairs},
              {"rms_residual", result.rms_residual},
              {"iterations_used", result.iterations_used}};
}

void Ransac3dParams::validate() const {
  if (!(inlier_threshold > 0.0)) fail(ErrorCode::ConfigError, "inlier_threshold must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) fail(ErrorCode::ConfigError, "confidence must lie in (0, 1)");
  if (max_iterations < 1) fail(ErrorCode::ConfigError, "max_iterations must be positive");
  if (min_inliers < kSampleSize) fail(ErrorCode::ConfigError, "min_inliers must be at least 3");
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) fail(ErrorCode::ConfigError, "keep_ratio must lie in (0, 1]");
}

RegistrationResult estimate_rigid_ransac(const PointCloudd& src, const PointCloudd& dst,
                                         const std::vector<IndexPair>& correspondences,
                                         const Ransac3dParams& params) {
  params.validate();
  const int n = static_cast<int>(correspondences.size());
  if (n < kSampleSize) {
    fail(ErrorCode::InsufficientMatches,
         "3D registration needs at least 3 matches, got " + std::to_string(n));
  }
  Eigen::Matrix3Xd a(3, n);
  Eigen::Matrix3Xd b(3, n);
  for (int k = 0; k < n; ++k) {
    const auto [i, j] = correspondences[static_cast<std::size_t>(k)];
    if (i < 0 || i >= src.size() || j < 0 || j >= dst.size()) {
      fail(ErrorCode::IndexOutOfRange, "correspondence index out of range");
    }
    a.col(k) = src.points.col(i);
    b.col(k) = dst.points.col(j);
  }

  const double thr2 = params.inlier_threshold * params.inlier_threshold;
  auto inliers_of = [&](const RigidTransform& m) {
    std::vector<int> in;
    for (int k = 0; k < n; ++k) {
      if ((m.rotation * a.col(k) + m.translation - b.col(k)).squaredNorm() <= thr2) {
        in.push_back(k);
      }
    }
    return in;
  };
  auto fit_subset = [&](std::span<const int> idx) -> std::optional<RigidTransform> {
    Eigen::Matrix3Xd sa(3, static_cast<Eigen::Index>(idx.size()));
    Eigen::Matrix3Xd sb(3, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t s = 0; s < idx.size(); ++s) {
      sa.col(static_cast<Eigen::Index>(s)) = a.col(idx[s]);
      sb.col(static_cast<Eigen::Index>(s)) = b.col(idx[s]);
    }
    try {
      return fit_rigid(sa, sb);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateConfiguration) return std::nullopt;
      throw;
    }
  };

  RansacOptions options;
  options.max_iterations = params.max_iterations;
  options.confidence = params.confidence;
  options.seed = params.seed;
  options.threads = params.threads;
  auto outcome = run_ransac<RigidTransform>(n, kSampleSize, options, fit_subset, inliers_of);
  if (!outcome.model || static_cast<int>(outcome.inliers.size()) < params.min_inliers) {
    fail(ErrorCode::NoConsensus,
         "no rigid model reached " + std::to_string(params.min_inliers) + " inliers (best " +
             std::to_string(outcome.inliers.size()) + ")");
  }

  RigidTransform model = *outcome.model;
  std::vector<int> inliers = outcome.inliers;
  for (int r = 0; r < kMaxRefits; ++r) {
    auto refit = fit_subset(inliers);
    if (!refit) break;
    std::vector<int> next = inliers_of(*refit);
    if (static_cast<int>(next.size()) < params.min_inliers) break;
    model = *refit;
    const bool stable = next == inliers;
    inliers = std::move(next);
    if (stable) break;
  }

  double sq = 0.0;
  for (int k : inliers) {
    sq += (model.rotation * a.col(k) + model.translation - b.col(k)).squaredNorm();
  }
  const double rms = inliers.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(inliers.size()));
  return RegistrationResult{Posed(dst.frame, src.frame, model.rotation, model.translation),
                            correspondences, std::move(inliers), rms, outcome.iterations};
}

RegistrationResult register_ransac3d(const FeatureCloud& cloud0, const FeatureCloud& cloudX,
                                     const Ransac3dParams& params) {
  params.validate();
  cloud0.validate();
  cloudX.validate();
  const auto matches =
      match_bruteforce_l2(cloud0.descriptors, cloudX.descriptors, params.keep_ratio, params.threads);
  std::vector<IndexPair> pairs;
  pairs.reserve(matches.size());
  for (const auto& m : matches) pairs.push_back({m.query_idx, m.train_idx});
  return estimate_rigid_ransac(cloud0.cloud(), cloudX.cloud(), pairs, params);
}

Posed chain_extrinsic_ransac(const Posed& wx_to_cx, const Posed& w0_to_wx,
                             const Posed& w0_to_c0) {
  return compose(compose(wx_to_cx, w0_to_wx), inverse(w0_to_c0));
}

std::string describe_ransac_chain(const Posed& wx_to_cx, const Posed& w0_to_wx,
                                  const Posed& w0_to_c0) {
  std::string s = arrow(wx_to_cx) + " * " + arrow(w0_to_wx) + " * inv(" + arrow(w0_to_c0) + ")";
  try {
    s += " = " + arrow(chain_extrinsic_ransac(wx_to_cx, w0_to_wx, w0_to_c0));
  } catch (const Error&) {
    s += " = <frame mismatch>";
  }
  return s;
}

}  // namespace plenreg
