#include "plenreg/config.hpp"

#include <charconv>
#include <sstream>

#include "plenreg/groundtruth.hpp"
#include "toml_util.hpp"

namespace plenreg {

namespace {

Eigen::Vector3d vec3(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

void read_ransac3d(const toml::table& t, Ransac3dParams& p) {
  tomlu::allow_keys(t, {"max_iterations", "inlier_threshold", "min_inliers", "confidence", "keep_ratio"},
                    "[ransac3d]");
  tomlu::read(t, "max_iterations", p.max_iterations);
  tomlu::read(t, "inlier_threshold", p.inlier_threshold);
  tomlu::read(t, "min_inliers", p.min_inliers);
  tomlu::read(t, "confidence", p.confidence);
  tomlu::read(t, "keep_ratio", p.keep_ratio);
}

void read_pnp(const toml::table& t, PnpParams& p) {
  tomlu::allow_keys(t, {"max_iterations", "inlier_threshold", "min_inliers", "confidence",
                        "fm_threshold", "lm_max_iters", "lm_tolerance", "knn_k"},
                    "[pnp]");
  tomlu::read(t, "max_iterations", p.max_iterations);
  tomlu::read(t, "inlier_threshold", p.inlier_threshold);
  tomlu::read(t, "min_inliers", p.min_inliers);
  tomlu::read(t, "confidence", p.confidence);
  tomlu::read(t, "fm_threshold", p.fm_threshold);
  tomlu::read(t, "lm_max_iters", p.lm_max_iters);
  tomlu::read(t, "lm_tolerance", p.lm_tolerance);
  tomlu::read(t, "knn_k", p.knn_k);
}

// Either {rotation_vector_deg, translation_mm} or, for cameras,
// {eye_mm, target_mm, roll_deg}.
Posed read_pose(const toml::table& t, const FrameId& parent, const FrameId& child,
                const std::string& ctx) {
  tomlu::allow_keys(t, {"rotation_vector_deg", "translation_mm", "eye_mm", "target_mm", "roll_deg"}, ctx);
  std::array<double, 3> a{}, b{};
  if (tomlu::read_array(t, "eye_mm", a)) {
    if (!tomlu::read_array(t, "target_mm", b)) fail(ErrorCode::ConfigError, ctx + ": eye_mm needs target_mm");
    double roll = 0.0;
    tomlu::read(t, "roll_deg", roll);
    return look_at(parent, child, vec3(a), vec3(b), roll);
  }
  std::array<double, 3> r{}, tr{};
  tomlu::read_array(t, "rotation_vector_deg", r);
  tomlu::read_array(t, "translation_mm", tr);
  return Posed(parent, child, so3_exp(Eigen::Vector3d(vec3(r) * (kPi<double> / 180.0))), vec3(tr));
}

void read_camera(const toml::table& t, CameraModel& m) {
  tomlu::allow_keys(t, {"B", "b_L0", "c_x", "c_y", "f_px", "pixel_size_um", "width", "height", "distortion"},
                    "[scene.camera]");
  auto& k = m.intrinsics;
  tomlu::read(t, "B", k.B);
  tomlu::read(t, "b_L0", k.b_L0);
  tomlu::read(t, "c_x", k.c_x);
  tomlu::read(t, "c_y", k.c_y);
  tomlu::read(t, "f_px", k.f_px);
  tomlu::read(t, "pixel_size_um", k.pixel_size_um);
  tomlu::read(t, "width", k.width);
  tomlu::read(t, "height", k.height);
  if (const auto* d = tomlu::table(t, "distortion")) {
    tomlu::allow_keys(*d, {"k1", "k2", "k3", "p1", "p2"}, "[scene.camera.distortion]");
    tomlu::read(*d, "k1", m.distortion.k1);
    tomlu::read(*d, "k2", m.distortion.k2);
    tomlu::read(*d, "k3", m.distortion.k3);
    tomlu::read(*d, "p1", m.distortion.p1);
    tomlu::read(*d, "p2", m.distortion.p2);
  }
}

void read_scene(const toml::table& t, SceneSpec& s) {
  tomlu::allow_keys(t, {"n_points", "center_mm", "extent_mm", "noise_3d_mm", "noise_px",
                        "outlier_fraction", "descriptor_dim", "virtual_depth", "depth_range",
                        "margin_px", "camera", "pose0", "posex", "world_x"},
                    "[scene]");
  tomlu::read(t, "n_points", s.n_points);
  std::array<double, 3> a{};
  if (tomlu::read_array(t, "center_mm", a)) s.center = vec3(a);
  if (tomlu::read_array(t, "extent_mm", a)) s.extent = vec3(a);
  tomlu::read(t, "noise_3d_mm", s.noise_3d);
  tomlu::read(t, "noise_px", s.noise_px);
  tomlu::read(t, "outlier_fraction", s.outlier_fraction);
  tomlu::read(t, "descriptor_dim", s.descriptor_dim);
  tomlu::read(t, "virtual_depth", s.virtual_depth);
  tomlu::read(t, "margin_px", s.margin_px);
  std::array<double, 2> range{};
  if (tomlu::read_array(t, "depth_range", range)) {
    s.depth_min = range[0];
    s.depth_max = range[1];
  }
  if (const auto* c = tomlu::table(t, "camera")) read_camera(*c, s.camera);
  if (const auto* p = tomlu::table(t, "pose0")) s.pose0 = read_pose(*p, "C0", "W0", "[scene.pose0]");
  if (const auto* p = tomlu::table(t, "posex")) s.poseX = read_pose(*p, "CX", "W0", "[scene.posex]");
  if (const auto* p = tomlu::table(t, "world_x")) s.world_x = read_pose(*p, "WX", "W0", "[scene.world_x]");
}

void read_trajectory(const toml::table& t, TrajectorySpec& s) {
  tomlu::allow_keys(t, {"n_frames", "factor", "object", "static", "step_rotation_deg",
                        "step_translation_mm", "plate_size_mm", "aruco_to_vicon_offset_mm",
                        "est_noise_mm", "est_noise_deg", "vicon_from_world", "schema"},
                    "[trajectory]");
  tomlu::read(t, "n_frames", s.n_frames);
  tomlu::read(t, "factor", s.factor);
  tomlu::read(t, "object", s.object);
  tomlu::read(t, "static", s.static_motion);
  tomlu::read(t, "step_rotation_deg", s.step_rotation_deg);
  tomlu::read(t, "step_translation_mm", s.step_translation_mm);
  tomlu::read(t, "est_noise_mm", s.est_noise_mm);
  tomlu::read(t, "est_noise_deg", s.est_noise_deg);
  std::array<double, 3> a{};
  if (tomlu::read_array(t, "plate_size_mm", a)) s.plate_size = vec3(a);
  if (tomlu::read_array(t, "aruco_to_vicon_offset_mm", a)) s.aruco_to_vicon_offset = vec3(a);
  if (const auto* p = tomlu::table(t, "vicon_from_world")) {
    s.vicon_from_world = read_pose(*p, kViconFrame, kWorldFrame, "[trajectory.vicon_from_world]");
  }
  if (const auto* sc = tomlu::table(t, "schema")) {
    std::ostringstream text;
    text << *sc;
    s.schema = vicon_schema_from_toml(text.str());
  }
}

}  // namespace

std::uint64_t parse_seed(std::string_view text, const std::string& what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail(ErrorCode::ConfigError, what + " is not an unsigned 64-bit integer: '" + std::string(text) + "'");
  }
  return v;
}

RunConfig parse_run_config(std::string_view text) {
  const toml::table t = tomlu::parse(text, "config");
  tomlu::allow_keys(t, {"seed", "threads", "ransac3d", "pnp", "scene", "trajectory"}, "config");
  RunConfig c;
  if (const toml::node* n = t.get("seed")) {
    // TOML integers are signed 64-bit; large seeds may be given as strings.
    if (n->is_string()) {
      c.seed = parse_seed(*n->value<std::string>(), "seed");
    } else {
      std::int64_t s = 0;
      tomlu::read(t, "seed", s);
      if (s < 0) fail(ErrorCode::ConfigError, "seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    }
  }
  if (t.get("threads")) {
    unsigned th = 1;
    tomlu::read(t, "threads", th);
    c.threads = th;
  }
  if (const auto* s = tomlu::table(t, "ransac3d")) read_ransac3d(*s, c.ransac3d);
  if (const auto* s = tomlu::table(t, "pnp")) read_pnp(*s, c.pnp);
  if (const auto* s = tomlu::table(t, "scene")) read_scene(*s, c.scene);
  if (const auto* s = tomlu::table(t, "trajectory")) read_trajectory(*s, c.trajectory);
  return c;
}

RunConfig load_run_config(const std::optional<std::string>& path) {
  if (!path) return {};
  return parse_run_config(read_file(*path));
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           const std::optional<std::uint64_t>& file, const char* env_value) {
  if (flag) return *flag;
  if (file) return *file;
  if (env_value && *env_value) return parse_seed(env_value, "PLENREG_SEED");
  return 0;
}

void apply_run_settings(RunConfig& config, std::uint64_t seed, unsigned threads) {
  config.ransac3d.seed = seed;
  config.ransac3d.threads = threads;
  config.pnp.seed = seed;
  config.pnp.threads = threads;
  config.scene.seed = seed;
  config.trajectory.seed = seed;
}

}  // namespace plenreg
