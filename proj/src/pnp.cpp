#include "plenreg/pnp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

#include "plenreg/fundamental.hpp"
#include "plenreg/pose_io.hpp"
#include "plenreg/ransac.hpp"

namespace plenreg {

namespace {

constexpr int kSampleSize = 6;

double sum_squared_reprojection(const Posed& pose, const Correspondences2d3d& c,
                                const PlenopticIntrinsics& k) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const Eigen::Vector3d pc = pose * c.world.col(i);
    if (!(pc.z() > 0.0)) return std::numeric_limits<double>::infinity();
    const Eigen::Vector2d u(k.f_px * pc.x() / pc.z() + k.c_x, k.f_px * pc.y() / pc.z() + k.c_y);
    cost += (u - c.pixels.col(i)).squaredNorm();
  }
  return cost;
}

// Squared reprojection error of every correspondence; +inf behind the camera.
std::vector<double> squared_errors(const RigidTransform& m, const Correspondences2d3d& c,
                                   const PlenopticIntrinsics& k) {
  std::vector<double> e(static_cast<std::size_t>(c.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const Eigen::Vector3d pc = m.rotation * c.world.col(i) + m.translation;
    if (!(pc.z() > 0.0)) {
      e[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
      continue;
    }
    const Eigen::Vector2d u(k.f_px * pc.x() / pc.z() + k.c_x, k.f_px * pc.y() / pc.z() + k.c_y);
    e[static_cast<std::size_t>(i)] = (u - c.pixels.col(i)).squaredNorm();
  }
  return e;
}

std::vector<int> inliers_within(const RigidTransform& m, const Correspondences2d3d& c,
                                const PlenopticIntrinsics& k, double threshold) {
  const double thr2 = threshold * threshold;
  const auto e = squared_errors(m, c, k);
  std::vector<int> in;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] <= thr2) in.push_back(static_cast<int>(i));
  }
  return in;
}

RigidTransform to_rigid(const Posed& p) { return {p.rotation(), p.translation()}; }

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

}  // namespace

void PnpParams::validate() const {
  if (!(inlier_threshold > 0.0)) fail(ErrorCode::ConfigError, "inlier_threshold must be positive");
  if (!(fm_threshold > 0.0)) fail(ErrorCode::ConfigError, "fm_threshold must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) fail(ErrorCode::ConfigError, "confidence must lie in (0, 1)");
  if (max_iterations < 1) fail(ErrorCode::ConfigError, "max_iterations must be positive");
  if (lm_max_iters < 0) fail(ErrorCode::ConfigError, "lm_max_iters must be non-negative");
  if (min_inliers < kSampleSize) fail(ErrorCode::ConfigError, "min_inliers must be at least 6");
  if (knn_k < 1) fail(ErrorCode::ConfigError, "knn_k must be at least 1");
}

Correspondences2d3d Correspondences2d3d::subset(const std::vector<int>& idx) const {
  Correspondences2d3d out;
  out.pixels.resize(2, static_cast<Eigen::Index>(idx.size()));
  out.world.resize(3, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t s = 0; s < idx.size(); ++s) {
    out.pixels.col(static_cast<Eigen::Index>(s)) = pixels.col(idx[s]);
    out.world.col(static_cast<Eigen::Index>(s)) = world.col(idx[s]);
  }
  return out;
}

std::optional<RigidTransform> pose_dlt(const Correspondences2d3d& corrs,
                                       const PlenopticIntrinsics& k, double max_condition) {
  const Eigen::Index n = corrs.size();
  if (n < kSampleSize) return std::nullopt;

  Eigen::Matrix2Xd m(2, n);
  m.row(0) = (corrs.pixels.row(0).array() - k.c_x) / k.f_px;
  m.row(1) = (corrs.pixels.row(1).array() - k.c_y) / k.f_px;
  const Eigen::Matrix3d T2 = hartley_normalization(m);

  const Eigen::Vector3d centroid = corrs.world.rowwise().mean();
  const double mean_dist = (corrs.world.colwise() - centroid).colwise().norm().mean();
  if (!(mean_dist > 0.0)) return std::nullopt;
  const double s3 = std::sqrt(3.0) / mean_dist;
  Eigen::Matrix4d T3 = Eigen::Matrix4d::Identity();
  T3.topLeftCorner<3, 3>() *= s3;
  T3.topRightCorner<3, 1>() = -s3 * centroid;

  Eigen::MatrixXd A(2 * n, 12);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector4d X = T3 * corrs.world.col(i).homogeneous();
    const Eigen::Vector3d x = T2 * m.col(i).homogeneous();
    A.row(2 * i) << X.transpose(), Eigen::RowVector4d::Zero(), -x(0) * X.transpose();
    A.row(2 * i + 1) << Eigen::RowVector4d::Zero(), X.transpose(), -x(1) * X.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(0) > max_condition * sv(10)) return std::nullopt;

  const Eigen::VectorXd p = svd.matrixV().col(11);
  const Eigen::Matrix<double, 3, 4> Pn = Eigen::Map<const Eigen::Matrix<double, 3, 4, Eigen::RowMajor>>(p.data());
  Eigen::Matrix<double, 3, 4> P = T2.inverse() * Pn * T3;
  if (P.leftCols<3>().determinant() < 0.0) P = -P;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd_r(P.leftCols<3>(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double scale = svd_r.singularValues().mean();
  if (!(scale > 0.0)) return std::nullopt;
  RigidTransform out;
  out.rotation = project_to_rotation(P.leftCols<3>().eval());
  out.translation = P.col(3) / scale;
  if (!out.rotation.allFinite() || !out.translation.allFinite()) return std::nullopt;
  return out;
}

ReprojectionTerm reprojection_term(const Posed& pose, const Eigen::Vector3d& world,
                                   const Eigen::Vector2d& observed, const PlenopticIntrinsics& k) {
  const Eigen::Vector3d rotated = pose.rotation() * world;
  const Eigen::Vector3d pc = rotated + pose.translation();
  if (!(pc.z() > 0.0)) fail(ErrorCode::BehindCamera, "point is behind the camera");
  const double iz = 1.0 / pc.z();
  ReprojectionTerm term;
  term.residual = Eigen::Vector2d(k.f_px * pc.x() * iz + k.c_x, k.f_px * pc.y() * iz + k.c_y) - observed;

  Eigen::Matrix<double, 2, 3> d_proj;
  d_proj << k.f_px * iz, 0.0, -k.f_px * pc.x() * iz * iz,
            0.0, k.f_px * iz, -k.f_px * pc.y() * iz * iz;
  term.jacobian.leftCols<3>() = -d_proj * skew(rotated);
  term.jacobian.rightCols<3>() = d_proj;
  return term;
}

Posed apply_increment(const Posed& pose, const Eigen::Matrix<double, 6, 1>& delta) {
  const Eigen::Vector3d w = delta.head<3>();
  return Posed(pose.parent(), pose.child(), so3_exp(w) * pose.rotation(),
               pose.translation() + delta.tail<3>());
}

LmSummary refine_lm(const Posed& initial, const Correspondences2d3d& inliers,
                    const PlenopticIntrinsics& k, const LmOptions& options) {
  if (inliers.size() < kSampleSize) {
    fail(ErrorCode::InsufficientCorrespondences, "refinement needs at least 6 inliers");
  }
  const double n = static_cast<double>(inliers.size());
  LmSummary summary{initial, false, 0, {}, 0.0, 0.0};
  double cost = sum_squared_reprojection(initial, inliers, k);
  if (!std::isfinite(cost)) fail(ErrorCode::BehindCamera, "initial pose puts inliers behind the camera");
  summary.cost_history.push_back(cost);
  summary.initial_rms = std::sqrt(cost / n);

  double lambda = options.initial_lambda;
  Posed current = initial;
  for (int it = 0; it < options.max_iterations; ++it) {
    summary.iterations = it + 1;
    if (cost == 0.0) {
      summary.converged = true;
      break;
    }
    Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (Eigen::Index i = 0; i < inliers.size(); ++i) {
      const auto term = reprojection_term(current, inliers.world.col(i), inliers.pixels.col(i), k);
      H.noalias() += term.jacobian.transpose() * term.jacobian;
      g.noalias() += term.jacobian.transpose() * term.residual;
    }

    bool accepted = false;
    while (!accepted && lambda < 1e16) {
      Eigen::Matrix<double, 6, 6> A = H;
      A.diagonal() += lambda * H.diagonal().cwiseMax(1e-12);
      const Eigen::Matrix<double, 6, 1> delta = A.ldlt().solve(-g);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Posed candidate = apply_increment(current, delta);
      const double new_cost = sum_squared_reprojection(candidate, inliers, k);
      if (new_cost < cost) {
        const double rel = (cost - new_cost) / cost;
        current = candidate;
        cost = new_cost;
        summary.cost_history.push_back(cost);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (rel < options.relative_tolerance) summary.converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    // No decreasing step left: a numerical minimum.
    if (!accepted) summary.converged = true;
    if (summary.converged) break;
  }
  summary.pose = current;
  summary.final_rms = std::sqrt(cost / n);
  return summary;
}

RegistrationResult pnp_ransac(const Correspondences2d3d& corrs, const PlenopticIntrinsics& k,
                              const PnpParams& params, const FrameId& camera_frame,
                              const FrameId& world_frame) {
  params.validate();
  const int n = static_cast<int>(corrs.size());
  if (n < kSampleSize) {
    fail(ErrorCode::InsufficientCorrespondences,
         "PnP needs at least 6 correspondences, got " + std::to_string(n));
  }

  auto solve = [&](std::span<const int> idx) {
    return pose_dlt(corrs.subset(std::vector<int>(idx.begin(), idx.end())), k);
  };
  auto score = [&](const RigidTransform& m) {
    return inliers_within(m, corrs, k, params.inlier_threshold);
  };

  RansacOptions options;
  options.max_iterations = params.max_iterations;
  options.confidence = params.confidence;
  options.seed = params.seed;
  options.threads = params.threads;
  auto outcome = run_ransac<RigidTransform>(n, kSampleSize, options, solve, score);
  if (!outcome.model || static_cast<int>(outcome.inliers.size()) < params.min_inliers) {
    fail(ErrorCode::NoConsensus,
         "no PnP model reached " + std::to_string(params.min_inliers) + " inliers (best " +
             std::to_string(outcome.inliers.size()) + ")");
  }

  RigidTransform model = *outcome.model;
  std::vector<int> inliers = outcome.inliers;
  // Minimal DLT samples are noisy; polish on the consensus set and rescore.
  for (int r = 0; r < 10; ++r) {
    RigidTransform refit;
    try {
      const Posed start(camera_frame, world_frame, model.rotation, model.translation);
      const Posed polished = refine_lm(start, corrs.subset(inliers), k).pose;
      refit = {polished.rotation(), polished.translation()};
    } catch (const Error&) {
      break;
    }
    auto next = score(refit);
    if (next.size() < inliers.size()) break;
    model = refit;
    const bool stable = next == inliers;
    inliers = std::move(next);
    if (stable) break;
  }

  const auto e = squared_errors(model, corrs, k);
  double sq = 0.0;
  for (int i : inliers) sq += e[static_cast<std::size_t>(i)];
  const double rms = std::sqrt(sq / static_cast<double>(inliers.size()));

  std::vector<IndexPair> pairs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pairs[static_cast<std::size_t>(i)] = {i, i};
  return RegistrationResult{Posed(camera_frame, world_frame, model.rotation, model.translation),
                            std::move(pairs), std::move(inliers), rms, outcome.iterations};
}

Posed chain_extrinsic_pnp(const Posed& w0_to_cx, const Posed& w0_to_c0) {
  return compose(w0_to_cx, inverse(w0_to_c0));
}

json pnp_result_to_json(const PnpPipelineResult& result) {
  const auto& d = result.diagnostics;
  json j = registration_to_json(result.registration);
  j["camera_from_world"] = pose_to_json(result.camera_from_world);
  j["diagnostics"] = {{"keypoints", d.keypoints},
                      {"matches", d.matches},
                      {"fm_applied", d.fm_applied},
                      {"fm_inliers", d.fm_inliers},
                      {"fm_note", d.fm_note},
                      {"pnp_inliers", d.pnp_inliers},
                      {"pnp_iterations", d.pnp_iterations},
                      {"lm_iterations", d.lm_iterations},
                      {"lm_converged", d.lm_converged},
                      {"lm_initial_rms", d.lm_initial_rms},
                      {"lm_final_rms", d.lm_final_rms},
                      {"final_inliers", d.final_inliers},
                      {"match_inlier_ratio",
                       d.matches ? static_cast<double>(d.final_inliers) / d.matches : 0.0}};
  return j;
}

PnpPipelineResult register_pnp_pipeline(const FeatureImage& image, const FeatureCloud& cloud0,
                                        const PlenopticIntrinsics& k, const DistortionModel& d,
                                        const ReferenceCamera& reference, const PnpParams& params,
                                        const FrameId& camera_frame) {
  run_stage("input", [&] {
    params.validate();
    image.validate();
    cloud0.validate();
    k.validate();
    if (!(reference.world_to_camera.child() == cloud0.frame)) {
      fail(ErrorCode::FrameMismatch, "reference camera pose must map the cloud frame " +
                                         cloud0.frame.label() + " into the camera");
    }
    return 0;
  });

  PnpDiagnostics diag;
  diag.keypoints = static_cast<int>(image.size());

  const Eigen::Matrix2Xd corrected = run_stage("undistort", [&] {
    Eigen::Matrix2Xd out(2, image.size());
    for (Eigen::Index i = 0; i < image.size(); ++i) {
      const PixelPoint u = undistort(image.keypoints.col(i), d, k);
      if (image.virtual_depths) {
        out.col(i) = project_to_common_plane(VirtualPoint<double>{u, (*image.virtual_depths)(i)}, k);
      } else {
        out.col(i) = u;
      }
    }
    return out;
  });

  const auto matches = run_stage("match", [&] {
    return match_knn_crosscheck(cloud0.descriptors, image.descriptors, params.knn_k, params.threads);
  });
  diag.matches = static_cast<int>(matches.size());

  // Candidate correspondences: (cloud index, image index).
  std::vector<IndexPair> candidates;
  for (const auto& m : matches) candidates.push_back({m.query_idx, m.train_idx});

  candidates = run_stage("fundamental", [&] {
    std::vector<IndexPair> visible;
    std::vector<Eigen::Vector2d> ref_px;
    for (const auto& c : candidates) {
      const Eigen::Vector3d pc = reference.world_to_camera * cloud0.points.col(c.src);
      if (pc.z() <= 0.0) continue;
      ref_px.emplace_back(reference.intrinsics.f_px * pc.x() / pc.z() + reference.intrinsics.c_x,
                          reference.intrinsics.f_px * pc.y() / pc.z() + reference.intrinsics.c_y);
      visible.push_back(c);
    }
    if (visible.size() < 8) {
      diag.fm_note = "skipped: fewer than 8 correspondences";
      return candidates;
    }
    Eigen::Matrix2Xd ref(2, static_cast<Eigen::Index>(visible.size()));
    Eigen::Matrix2Xd query(2, static_cast<Eigen::Index>(visible.size()));
    for (std::size_t i = 0; i < visible.size(); ++i) {
      ref.col(static_cast<Eigen::Index>(i)) = ref_px[i];
      query.col(static_cast<Eigen::Index>(i)) = corrected.col(visible[i].dst);
    }
    FundamentalOptions fo;
    fo.threshold_px = params.fm_threshold;
    fo.max_iterations = params.max_iterations;
    fo.confidence = params.confidence;
    fo.seed = splitmix64(params.seed ^ 0x46554e44ULL);
    fo.threads = params.threads;
    try {
      const auto fm = fundamental_8point_ransac(ref, query, fo);
      std::vector<IndexPair> kept;
      for (std::size_t i = 0; i < visible.size(); ++i) {
        if (fm.inlier_mask[i]) kept.push_back(visible[i]);
      }
      diag.fm_applied = true;
      diag.fm_inliers = fm.inlier_count;
      return kept;
    } catch (const Error& e) {
      // Zero-parallax views have no unique fundamental matrix.
      if (e.code() != ErrorCode::DegenerateConfiguration) throw;
      diag.fm_note = "skipped: degenerate two-view geometry";
      return candidates;
    }
  });

  Correspondences2d3d corrs;
  corrs.pixels.resize(2, static_cast<Eigen::Index>(candidates.size()));
  corrs.world.resize(3, static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    corrs.world.col(static_cast<Eigen::Index>(i)) = cloud0.points.col(candidates[i].src);
    corrs.pixels.col(static_cast<Eigen::Index>(i)) = corrected.col(candidates[i].dst);
  }

  const RegistrationResult initial = run_stage("pnp", [&] {
    return pnp_ransac(corrs, k, params, camera_frame, cloud0.frame);
  });
  diag.pnp_inliers = static_cast<int>(initial.inlier_indices.size());
  diag.pnp_iterations = initial.iterations_used;

  const LmSummary lm = run_stage("refine", [&] {
    LmOptions lo;
    lo.max_iterations = params.lm_max_iters;
    lo.relative_tolerance = params.lm_tolerance;
    return refine_lm(initial.pose, corrs.subset(initial.inlier_indices), k, lo);
  });
  diag.lm_iterations = lm.iterations;
  diag.lm_converged = lm.converged;
  diag.lm_initial_rms = lm.initial_rms;
  diag.lm_final_rms = lm.final_rms;

  std::vector<int> final_inliers = inliers_within(to_rigid(lm.pose), corrs, k, params.inlier_threshold);
  const auto e = squared_errors(to_rigid(lm.pose), corrs, k);
  double sq = 0.0;
  for (int i : final_inliers) sq += e[static_cast<std::size_t>(i)];
  diag.final_inliers = static_cast<int>(final_inliers.size());

  const Posed extrinsic = run_stage("chain", [&] {
    return chain_extrinsic_pnp(lm.pose, reference.world_to_camera);
  });

  const double rms = final_inliers.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(final_inliers.size()));
  return PnpPipelineResult{
      RegistrationResult{extrinsic, std::move(candidates), std::move(final_inliers), rms,
                         initial.iterations_used},
      lm.pose, diag};
}

}  // namespace plenreg
