#pragma once

// Seeded synthetic scenes and trajectories with exact ground truth.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "plenreg/eval_metrics.hpp"
#include "plenreg/feature_match.hpp"
#include "plenreg/groundtruth.hpp"
#include "plenreg/plenoptic_io.hpp"

namespace plenreg {

// Camera <- world pose of a camera at `eye` looking at `target` (x right,
// y down, z forward), rolled about its optical axis.
Posed look_at(const FrameId& camera, const FrameId& world, const Eigen::Vector3d& eye,
              const Eigen::Vector3d& target, double roll_deg = 0.0);

// Corrected view of the reference camera type at quarter sensor resolution.
CameraModel default_synthetic_camera();

struct SceneSpec {
  int n_points = 200;
  Eigen::Vector3d center{0.0, 0.0, 2000.0};    // box center in W0, mm
  Eigen::Vector3d extent{1000.0, 800.0, 1000.0};
  Posed pose0 = look_at("C0", "W0", {-50.0, 30.0, -20.0}, {10.0, -20.0, 2000.0}, 1.5);
  Posed poseX = look_at("CX", "W0", {400.0, -60.0, 150.0}, {0.0, 0.0, 2000.0}, 4.0);
  Posed world_x = Posed("WX", "W0", so3_exp(Eigen::Vector3d(0.3, -0.2, 0.4)),
                        Eigen::Vector3d(150.0, -250.0, 80.0));
  double noise_3d = 0.0;  // mm
  double noise_px = 0.0;
  double outlier_fraction = 0.0;
  int descriptor_dim = 32;
  std::uint64_t seed = 0;
  CameraModel camera = default_synthetic_camera();
  bool virtual_depth = false;
  double depth_min = 2.0;  // virtual depth range of generated keypoints
  double depth_max = 4.0;
  double margin_px = 10.0;

  void validate() const;
};

struct Scene {
  FeatureCloud cloud0;  // frame W0
  FeatureCloud cloudX;  // frame WX
  FeatureImage image;   // seen by camera X
  Posed pose0;          // C0 <- W0
  Posed poseX;          // CX <- W0
  Posed world_x;        // WX <- W0
  Posed cx_from_wx;     // CX <- WX
  Posed extrinsic;      // CX <- C0
  std::vector<bool> inlier;      // per cloud0 point
  std::vector<int> x_index;      // cloud0 point i is cloudX point x_index[i]
  std::vector<int> image_index;  // ... and keypoint image_index[i]
};

Scene generate_scene(const SceneSpec& spec);

struct TrajectorySpec {
  int n_frames = 20;
  int factor = 8;
  std::string object = "cam0";
  bool static_motion = false;
  double step_rotation_deg = 1.0;     // typical rotation per camera frame
  double step_translation_mm = 20.0;  // typical translation per camera frame
  Posed vicon_from_world = Posed("vicon", "world", so3_exp(Eigen::Vector3d(0.05, -0.1, 0.6)),
                                 Eigen::Vector3d(-800.0, 450.0, 720.0));
  Eigen::Vector3d plate_size{300.0, 200.0, 0.0};  // template position of P1
  Eigen::Vector3d aruco_to_vicon_offset{12.0, -6.0, 4.0};
  double est_noise_mm = 2.0;   // perturbation of the exported estimate
  double est_noise_deg = 0.2;
  ViconSchema schema;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrajectoryData {
  Trajectory frames;           // world <- object, one per camera frame
  std::vector<Posed> samples;  // world <- object at tracker rate
  Trajectory estimate;         // frames with seeded per-frame perturbation
  std::string csv;             // tracker export in spec.schema
  MarkerPlate plate;
  PlateCheck check;
};

TrajectoryData generate_trajectory(const TrajectorySpec& spec);

json scene_truth_to_json(const Scene& scene, const SceneSpec& spec);

// Writes the feature sidecars, intrinsics, calibration poses, tracker CSV,
// schema, plate description, trajectories and truth.json into `dir`.
// Returns the written file names.
std::vector<std::string> write_synthetic_dataset(const std::filesystem::path& dir,
                                                 const SceneSpec& scene_spec,
                                                 const TrajectorySpec& trajectory_spec);

// Deterministic generator helpers, independent of the standard library's
// distribution implementations.
double uniform01(std::mt19937_64& rng);
double standard_normal(std::mt19937_64& rng);

}  // namespace plenreg
