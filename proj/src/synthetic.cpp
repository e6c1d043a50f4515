#include "plenreg/synthetic.hpp"

#include <cmath>
#include <numeric>

#include "plenreg/feature_io.hpp"
#include "plenreg/pose_io.hpp"
#include "plenreg/ransac.hpp"

namespace plenreg {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi<double> * u2);
}

namespace {

Eigen::Vector3d normal3(std::mt19937_64& rng) {
  const double a = standard_normal(rng);
  const double b = standard_normal(rng);
  const double c = standard_normal(rng);
  return {a, b, c};
}

DescriptorMatrix random_descriptor(std::mt19937_64& rng, int dim) {
  DescriptorMatrix d(1, dim);
  for (int j = 0; j < dim; ++j) d(0, j) = static_cast<float>(uniform01(rng));
  return d;
}

std::vector<int> permutation(std::mt19937_64& rng, int n) {
  return draw_sample(rng, n, n);
}

bool inside(const Eigen::Vector2d& px, const PlenopticIntrinsics& k, double margin) {
  return px.x() >= margin && px.y() >= margin && px.x() <= k.width - margin &&
         px.y() <= k.height - margin;
}

// Distorted sensor position of a corrected-view pixel; with a virtual depth
// the point is first moved back onto the virtual image.
Eigen::Vector2d sensor_position(const Eigen::Vector2d& corrected, bool virtual_depth, double depth,
                                const CameraModel& cam) {
  Eigen::Vector2d p = corrected;
  if (virtual_depth) p = virtual_from_common_plane(p, depth, cam.intrinsics);
  return distort(p, cam.distortion, cam.intrinsics);
}

std::optional<Eigen::Vector2d> visible_pixel(const Eigen::Vector3d& w, const Posed& cam_from_w,
                                             const PlenopticIntrinsics& k, double margin) {
  const Eigen::Vector3d pc = cam_from_w * w;
  if (pc.z() < 1.0) return std::nullopt;
  const Eigen::Vector2d px(k.f_px * pc.x() / pc.z() + k.c_x, k.f_px * pc.y() / pc.z() + k.c_y);
  if (!inside(px, k, margin)) return std::nullopt;
  return px;
}

}  // namespace

Posed look_at(const FrameId& camera, const FrameId& world, const Eigen::Vector3d& eye,
              const Eigen::Vector3d& target, double roll_deg) {
  const Eigen::Vector3d z = (target - eye).normalized();
  Eigen::Vector3d x = Eigen::Vector3d::UnitY().cross(z);
  if (x.norm() < 1e-9) x = Eigen::Vector3d::UnitX();
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d world_from_cam;
  world_from_cam << x, y, z;
  const Eigen::Matrix3d R =
      rotation_from_axis_angle(Eigen::Vector3d::UnitZ().eval(), deg2rad(roll_deg)) *
      world_from_cam.transpose();
  return Posed(camera, world, project_to_rotation(R), -R * eye);
}

CameraModel default_synthetic_camera() {
  CameraModel m;
  auto& k = m.intrinsics;
  k.pixel_size_um = 4 * 3.2;
  k.f_px = focal_length_px(25.0, k.pixel_size_um);
  k.width = 6560 / 4;
  k.height = 4948 / 4;
  k.c_x = 0.5 * k.width;
  k.c_y = 0.5 * k.height;
  k.B = 0.36;
  k.b_L0 = 26.0;
  m.distortion = DistortionModel{-0.03, 0.005, 0.0, 1e-4, -1e-4};
  return m;
}

void SceneSpec::validate() const {
  if (n_points < 6) fail(ErrorCode::InvalidArgument, "scene needs at least 6 points");
  if (!(extent.minCoeff() > 0.0)) fail(ErrorCode::InvalidArgument, "scene extent must be positive");
  if (!(noise_3d >= 0.0) || !(noise_px >= 0.0)) fail(ErrorCode::InvalidArgument, "noise must be non-negative");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "outlier_fraction must lie in [0, 1)");
  }
  if (descriptor_dim < 1) fail(ErrorCode::InvalidArgument, "descriptor_dim must be positive");
  if (!(pose0.child() == world_x.child()) || !(poseX.child() == world_x.child())) {
    fail(ErrorCode::FrameMismatch, "pose0, poseX and world_x must share the cloud frame");
  }
  if (virtual_depth && !(depth_min > 0.0 && depth_min < depth_max)) {
    fail(ErrorCode::InvalidArgument, "virtual depth range must satisfy 0 < min < max");
  }
  camera.intrinsics.validate();
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(splitmix64(spec.seed));
  const auto& k = spec.camera.intrinsics;
  const int n = spec.n_points;

  std::vector<Eigen::Vector3d> truth(static_cast<std::size_t>(n));
  std::vector<Eigen::Vector2d> pixels(static_cast<std::size_t>(n));
  auto sample_box = [&] {
    Eigen::Vector3d u(uniform01(rng), uniform01(rng), uniform01(rng));
    return Eigen::Vector3d(spec.center + (u.array() - 0.5).matrix().cwiseProduct(spec.extent));
  };
  for (int i = 0; i < n; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) {
        fail(ErrorCode::InvalidArgument, "scene box is not visible from both cameras");
      }
      const Eigen::Vector3d p = sample_box();
      if (!visible_pixel(p, spec.pose0, k, spec.margin_px)) continue;
      const auto px = visible_pixel(p, spec.poseX, k, spec.margin_px);
      if (!px) continue;
      truth[static_cast<std::size_t>(i)] = p;
      pixels[static_cast<std::size_t>(i)] = *px;
      break;
    }
  }

  std::vector<bool> inlier(static_cast<std::size_t>(n), true);
  const int n_out = static_cast<int>(std::lround(spec.outlier_fraction * n));
  for (int i : draw_sample(rng, n, n_out)) inlier[static_cast<std::size_t>(i)] = false;
  const std::vector<int> perm_x = permutation(rng, n);
  const std::vector<int> perm_i = permutation(rng, n);

  Scene s{FeatureCloud{Eigen::Matrix3Xd(3, n), spec.pose0.child(), DescriptorMatrix(n, spec.descriptor_dim)},
          FeatureCloud{Eigen::Matrix3Xd(3, n), spec.world_x.parent(), DescriptorMatrix(n, spec.descriptor_dim)},
          FeatureImage{Eigen::Matrix2Xd(2, n), DescriptorMatrix(n, spec.descriptor_dim), std::nullopt},
          spec.pose0,
          spec.poseX,
          spec.world_x,
          compose(spec.poseX, inverse(spec.world_x)),
          compose(spec.poseX, inverse(spec.pose0)),
          inlier,
          perm_x,
          perm_i};
  Eigen::VectorXd depths(n);

  for (int i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const int xi = perm_x[si];
    const int ii = perm_i[si];
    const Eigen::Vector3d& p = truth[si];
    const DescriptorMatrix d0 = random_descriptor(rng, spec.descriptor_dim);
    s.cloud0.points.col(i) = p + spec.noise_3d * normal3(rng);
    s.cloud0.descriptors.row(i) = d0;

    const double v = spec.depth_min + (spec.depth_max - spec.depth_min) * uniform01(rng);
    depths(ii) = v;
    if (inlier[si]) {
      s.cloudX.points.col(xi) = spec.world_x * p + spec.noise_3d * normal3(rng);
      s.cloudX.descriptors.row(xi) = d0;
      const Eigen::Vector2d noise(standard_normal(rng), standard_normal(rng));
      s.image.keypoints.col(ii) = sensor_position(pixels[si], spec.virtual_depth, v, spec.camera) + spec.noise_px * noise;
      s.image.descriptors.row(ii) = d0;
    } else {
      s.cloudX.points.col(xi) = spec.world_x * sample_box() + spec.noise_3d * normal3(rng);
      s.cloudX.descriptors.row(xi) = random_descriptor(rng, spec.descriptor_dim);
      const Eigen::Vector2d u(spec.margin_px + uniform01(rng) * (k.width - 2 * spec.margin_px),
                              spec.margin_px + uniform01(rng) * (k.height - 2 * spec.margin_px));
      s.image.keypoints.col(ii) = sensor_position(u, spec.virtual_depth, v, spec.camera);
      s.image.descriptors.row(ii) = random_descriptor(rng, spec.descriptor_dim);
    }
  }
  if (spec.virtual_depth) s.image.virtual_depths = depths;
  return s;
}

void TrajectorySpec::validate() const {
  if (n_frames < 2) fail(ErrorCode::InvalidArgument, "trajectory needs at least 2 frames");
  if (factor < 1) fail(ErrorCode::InvalidArgument, "factor must be at least 1");
  if (object.empty()) fail(ErrorCode::InvalidArgument, "object name must not be empty");
  if (!(est_noise_mm >= 0.0) || !(est_noise_deg >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "estimate noise must be non-negative");
  }
  schema.validate();
}

TrajectoryData generate_trajectory(const TrajectorySpec& spec) {
  spec.validate();
  std::mt19937_64 rng(splitmix64(spec.seed ^ 0x7472616aULL));
  const FrameId object(spec.object);
  const int n_samples = (spec.n_frames - 1) * spec.factor + 1;

  TrajectoryData out;
  Posed current = look_at(object, kWorldFrame, {600.0, 400.0, -900.0}, {600.0, 350.0, 1000.0}, 0.0);
  current = inverse(current);  // world <- object
  Eigen::Vector3d w_vel = Eigen::Vector3d::Zero();
  Eigen::Vector3d t_vel = Eigen::Vector3d::Zero();
  const double rot_step = deg2rad(spec.step_rotation_deg) / spec.factor;
  const double trans_step = spec.step_translation_mm / spec.factor;
  for (int s = 0; s < n_samples; ++s) {
    out.samples.push_back(current);
    if (spec.static_motion) continue;
    w_vel = 0.9 * w_vel + 0.1 * normal3(rng);
    t_vel = 0.9 * t_vel + 0.1 * normal3(rng);
    // 0.23 ~ stationary sd of the smoothed velocity.
    const Eigen::Vector3d w = rot_step * w_vel / 0.23;
    const Eigen::Vector3d t = trans_step * t_vel / 0.23;
    current = Posed(current.parent(), current.child(), project_to_rotation((current.rotation() * so3_exp(w)).eval()),
                    current.translation() + t);
  }
  for (int k = 0; k < spec.n_frames; ++k) {
    out.frames.emplace_back(out.samples[static_cast<std::size_t>(k * spec.factor)]);
  }
  for (const auto& f : out.frames) {
    const Eigen::Vector3d dw = deg2rad(spec.est_noise_deg) * normal3(rng);
    const Eigen::Vector3d dt = spec.est_noise_mm * normal3(rng);
    out.estimate.emplace_back(Posed(f->parent(), f->child(), f->rotation() * so3_exp(dw),
                                    f->translation() + f->rotation() * dt));
  }

  const Eigen::Matrix3d& R = spec.vicon_from_world.rotation();
  const Eigen::Vector3d P2 = spec.vicon_from_world.translation() - R * spec.aruco_to_vicon_offset;
  const double L = spec.plate_size.x(), W = spec.plate_size.y();
  out.plate = MarkerPlate{P2 + R * Eigen::Vector3d(0, W, 0), P2 + R * spec.plate_size,
                          P2, P2 + R * Eigen::Vector3d(L, 0, 0), spec.aruco_to_vicon_offset};
  out.check = PlateCheck{spec.plate_size, 5.0};
  const Posed plate = plate_frame(out.plate, out.check);

  const ViconSchema& schema = spec.schema;
  std::string csv = schema.frame_column;
  for (const auto& f : schema.fields()) csv += "," + schema.column(spec.object, f);
  csv += "\n";
  for (int s = 0; s < n_samples; ++s) {
    const Posed in_vicon = from_common_frame(out.samples[static_cast<std::size_t>(s)], plate,
                                             spec.aruco_to_vicon_offset);
    const Posed raw = convert_handedness(in_vicon, schema.handedness_axis);
    csv += std::to_string(s + 1);
    const Eigen::VectorXd rot = rotation_to_vicon(raw.rotation(), schema);
    for (Eigen::Index i = 0; i < rot.size(); ++i) csv += "," + format_double(rot(i));
    for (int i = 0; i < 3; ++i) csv += "," + format_double(raw.translation()(i) / schema.position_scale);
    csv += "\n";
  }
  out.csv = std::move(csv);
  return out;
}

json scene_truth_to_json(const Scene& scene, const SceneSpec& spec) {
  std::vector<int> inlier;
  for (bool b : scene.inlier) inlier.push_back(b ? 1 : 0);
  return {{"seed", spec.seed},
          {"extrinsic", pose_to_json(scene.extrinsic)},
          {"cloud_transform", pose_to_json(scene.world_x)},
          {"camera_from_world", pose_to_json(scene.poseX)},
          {"cam0_pose", pose_to_json(scene.pose0)},
          {"camx_pose", pose_to_json(scene.cx_from_wx)},
          {"inlier", inlier},
          {"x_index", scene.x_index},
          {"image_index", scene.image_index}};
}

std::vector<std::string> write_synthetic_dataset(const std::filesystem::path& dir,
                                                 const SceneSpec& scene_spec,
                                                 const TrajectorySpec& trajectory_spec) {
  const Scene scene = generate_scene(scene_spec);
  const TrajectoryData traj = generate_trajectory(trajectory_spec);
  std::vector<std::string> written;
  auto put = [&](const std::string& name, std::string_view bytes) {
    write_file(dir / name, bytes);
    written.push_back(name);
  };
  auto put_json = [&](const std::string& name, const json& j) { put(name, j.dump(2) + "\n"); };

  put("cloud0.lfmf", encode_sidecar(to_feature_set(scene.cloud0)));
  put("cloudx.lfmf", encode_sidecar(to_feature_set(scene.cloudX)));
  put("image.lfmf", encode_sidecar(to_feature_set(scene.image)));
  put_json("intrinsics.json", camera_model_to_json(scene_spec.camera));
  put_json("cam0_pose.json", pose_to_json(scene.pose0));
  put_json("camx_pose.json", pose_to_json(scene.cx_from_wx));
  put_json("truth.json", scene_truth_to_json(scene, scene_spec));
  put("vicon.csv", traj.csv);
  put("vicon_schema.toml", vicon_schema_to_toml(trajectory_spec.schema));
  put_json("plate.json", marker_plate_to_json(traj.plate, traj.check));
  put_json("trajectory_gt.json", trajectory_to_json(traj.frames, "groundtruth"));
  put_json("trajectory_est.json", trajectory_to_json(traj.estimate, "synthetic"));
  return written;
}

}  // namespace plenreg
