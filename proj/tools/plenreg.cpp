// plenreg: extrinsic registration of plenoptic cameras and trajectory
// evaluation against motion-capture ground truth.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "plenreg/config.hpp"
#include "plenreg/eval_metrics.hpp"
#include "plenreg/feature_io.hpp"
#include "plenreg/groundtruth.hpp"
#include "plenreg/mla_calib.hpp"
#include "plenreg/plenoptic_io.hpp"
#include "plenreg/pnp.hpp"
#include "plenreg/pose_io.hpp"
#include "plenreg/registration_ransac3d.hpp"
#include "plenreg/synthetic.hpp"

namespace fs = std::filesystem;
using namespace plenreg;

namespace {

struct Common {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

struct Resolved {
  RunConfig config;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

Resolved resolve(const Common& c) {
  Resolved r;
  r.config = load_run_config(c.config);
  r.seed = resolve_seed(c.seed, r.config.seed, std::getenv("PLENREG_SEED"));
  r.threads = c.threads.value_or(r.config.threads.value_or(1));
  apply_run_settings(r.config, r.seed, r.threads);
  std::cerr << "seed: " << r.seed << "\n";
  return r;
}

void emit(const std::optional<std::string>& out, const std::string& bytes) {
  if (out) {
    write_file(*out, bytes);
  } else {
    std::cout << bytes;
  }
}

// Calibration pose normalized to camera <- cloud, whichever way the file stores it.
Posed camera_from_cloud(const std::string& path, const FrameId& cloud) {
  const Posed p = pose_from_json(read_json_file(path));
  if (p.child() == cloud) return p;
  if (p.parent() == cloud) return inverse(p);
  fail(ErrorCode::ConfigError, path + ": pose " + p.parent().label() + "<-" + p.child().label() +
                                   " does not involve frame " + cloud.label());
}

// ---------------------------------------------------------------- parse-mla

struct ParseMlaArgs {
  std::string xml;
  bool as_json = false;
  std::optional<std::string> out;
};

int cmd_parse_mla(const ParseMlaArgs& a, const Common& c) {
  resolve(c);
  const MlaParseResult r = parse_mla_xml(read_file(a.xml));
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  emit(a.out, a.as_json ? mla_to_json(r.calibration).dump(2) + "\n" : serialize_mla_xml(r.calibration));
  return 0;
}

// ---------------------------------------------------------------- register

struct RegisterArgs {
  std::string cloud0;
  std::optional<std::string> cloudx;
  std::optional<std::string> image;
  std::string cam0_pose;
  std::optional<std::string> camx_pose;
  std::optional<std::string> intrinsics;
  std::optional<std::string> ref_intrinsics;
  std::string cloud0_frame = "W0";
  std::string cloudx_frame = "WX";
  std::string camera_frame = "CX";
  std::optional<std::string> out;
  bool convention = false;
  std::optional<double> threshold, fm_threshold, confidence, keep_ratio;
  std::optional<int> max_iterations, min_inliers, lm_max_iters, knn_k;
};

json run_ransac3d(const RegisterArgs& a, Resolved& r) {
  if (!a.cloudx) fail(ErrorCode::ConfigError, "ransac3d needs --cloudx");
  if (!a.camx_pose) fail(ErrorCode::ConfigError, "ransac3d needs --camx-pose");
  auto& p = r.config.ransac3d;
  if (a.threshold) p.inlier_threshold = *a.threshold;
  if (a.confidence) p.confidence = *a.confidence;
  if (a.keep_ratio) p.keep_ratio = *a.keep_ratio;
  if (a.max_iterations) p.max_iterations = *a.max_iterations;
  if (a.min_inliers) p.min_inliers = *a.min_inliers;
  p.validate();

  const FrameId f0(a.cloud0_frame), fx(a.cloudx_frame);
  const FeatureCloud cloud0 = to_feature_cloud(read_feature_file(a.cloud0), f0);
  const FeatureCloud cloudx = to_feature_cloud(read_feature_file(*a.cloudx), fx);
  const Posed c0_w0 = camera_from_cloud(a.cam0_pose, f0);
  const Posed cx_wx = camera_from_cloud(*a.camx_pose, fx);

  RegistrationResult reg = [&] {
    try {
      return register_ransac3d(cloud0, cloudx, p);
    } catch (const Error& e) {
      throw e.stage().empty() ? e.with_stage("ransac3d") : e;
    }
  }();
  if (a.convention) std::cout << describe_ransac_chain(cx_wx, reg.pose, c0_w0) << "\n";
  const Posed extrinsic = chain_extrinsic_ransac(cx_wx, reg.pose, c0_w0);
  json j{{"method", "ransac3d"},
         {"seed", r.seed},
         {"extrinsic", pose_to_json(extrinsic)},
         {"cloud_transform", pose_to_json(reg.pose)},
         {"registration", registration_to_json(reg)}};
  std::cerr << "inliers: " << reg.inlier_indices.size() << "/" << reg.correspondences.size()
            << ", rms " << reg.rms_residual << " mm\n";
  return j;
}

json run_pnp(const RegisterArgs& a, Resolved& r) {
  if (!a.image) fail(ErrorCode::ConfigError, "pnp needs --image");
  if (!a.intrinsics) fail(ErrorCode::ConfigError, "pnp needs --intrinsics");
  auto& p = r.config.pnp;
  if (a.threshold) p.inlier_threshold = *a.threshold;
  if (a.fm_threshold) p.fm_threshold = *a.fm_threshold;
  if (a.confidence) p.confidence = *a.confidence;
  if (a.max_iterations) p.max_iterations = *a.max_iterations;
  if (a.min_inliers) p.min_inliers = *a.min_inliers;
  if (a.lm_max_iters) p.lm_max_iters = *a.lm_max_iters;
  if (a.knn_k) p.knn_k = *a.knn_k;
  p.validate();

  const FrameId f0(a.cloud0_frame);
  const CameraModel camx = camera_model_from_json(read_json_file(*a.intrinsics));
  const CameraModel cam0 =
      a.ref_intrinsics ? camera_model_from_json(read_json_file(*a.ref_intrinsics)) : camx;
  const FeatureCloud cloud0 = to_feature_cloud(read_feature_file(a.cloud0), f0);
  const FeatureImage image = to_feature_image(read_feature_file(*a.image));
  const ReferenceCamera ref{camera_from_cloud(a.cam0_pose, f0), cam0.intrinsics};

  const PnpPipelineResult res =
      register_pnp_pipeline(image, cloud0, camx.intrinsics, camx.distortion, ref, p, FrameId(a.camera_frame));
  if (a.convention) {
    std::cout << res.camera_from_world.parent().label() << "<-" << res.camera_from_world.child().label()
              << " * inv(" << ref.world_to_camera.parent().label() << "<-"
              << ref.world_to_camera.child().label() << ") = " << res.registration.pose.parent().label()
              << "<-" << res.registration.pose.child().label() << "\n";
  }
  if (!res.diagnostics.fm_note.empty()) std::cerr << "fundamental filter " << res.diagnostics.fm_note << "\n";
  std::cerr << "inliers: " << res.registration.inlier_indices.size() << "/"
            << res.registration.correspondences.size() << ", rms " << res.registration.rms_residual
            << " px\n";
  return json{{"method", "pnp"},
              {"seed", r.seed},
              {"extrinsic", pose_to_json(res.registration.pose)},
              {"registration", pnp_result_to_json(res)}};
}

int cmd_register(const std::string& method, const RegisterArgs& a, const Common& c) {
  Resolved r = resolve(c);
  const json j = method == "ransac3d" ? run_ransac3d(a, r) : run_pnp(a, r);
  emit(a.out, j.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- align

struct AlignArgs {
  std::string vicon;
  std::optional<std::string> schema;
  std::string plate;
  std::string object = "cam0";
  std::optional<int> frames;
  int factor = 8;
  int offset = 0;
  std::optional<std::string> out;
};

Trajectory align_trajectory(const AlignArgs& a, std::optional<int> frames) {
  const ViconSchema schema = a.schema ? vicon_schema_from_toml(read_file(*a.schema)) : ViconSchema{};
  const ViconData data = parse_vicon_csv(read_file(a.vicon), schema);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";
  const json pj = read_json_file(a.plate);
  const MarkerPlate plate = marker_plate_from_json(pj);
  const Posed plate_pose = plate_frame(plate, plate_check_from_json(pj));

  const ViconStream& stream = data.stream(a.object);
  const int available =
      stream.entries.size() > static_cast<std::size_t>(a.offset)
          ? static_cast<int>((stream.entries.size() - 1 - static_cast<std::size_t>(a.offset)) /
                             static_cast<std::size_t>(a.factor)) + 1
          : 0;
  Trajectory t;
  for (const auto& f : sync_frames(stream, frames.value_or(available), a.factor, a.offset)) {
    if (f.pose) {
      t.emplace_back(to_common_frame(*f.pose, plate_pose, plate.aruco_to_vicon_offset));
    } else {
      t.emplace_back(std::nullopt);
    }
  }
  return t;
}

int cmd_align(const AlignArgs& a, const Common& c) {
  resolve(c);
  const Trajectory t = align_trajectory(a, a.frames);
  int gaps = 0;
  for (const auto& p : t) gaps += p ? 0 : 1;
  std::cerr << "frames: " << t.size() << ", gaps: " << gaps << "\n";
  emit(a.out, trajectory_to_json(t, "groundtruth").dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string est;
  std::string gt;
  AlignArgs align;
  std::string out;
  bool per_axis = false;
  std::optional<std::string> diff;
  int stride = 1;
  std::optional<std::string> sequence;
};

MethodReport evaluate_method(const std::string& name, const Trajectory& est, const Trajectory& gt,
                             int stride, bool per_axis) {
  MethodReport m{name, relative_errors(est, gt, stride), absolute_errors(est, gt), std::nullopt};
  if (per_axis) m.per_axis = per_axis_errors(est, gt);
  return m;
}

std::string method_name(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("method") && j["method"].is_string()) return j["method"].get<std::string>();
  return fs::path(path).stem().string();
}

int cmd_evaluate(EvaluateArgs a, const Common& c) {
  resolve(c);
  const json est_json = read_json_file(a.est);
  const Trajectory est = trajectory_from_json(est_json);
  Trajectory gt;
  if (fs::path(a.gt).extension() == ".json") {
    gt = trajectory_from_json(read_json_file(a.gt));
  } else {
    a.align.vicon = a.gt;
    if (a.align.plate.empty()) fail(ErrorCode::ConfigError, "--plate is required with a tracker CSV");
    gt = align_trajectory(a.align, static_cast<int>(est.size()));
  }

  EvalReport report;
  report.stride = a.stride;
  SequenceReport seq;
  seq.sequence = a.sequence.value_or(fs::path(a.gt).stem().string());
  const std::string name = method_name(est_json, a.est);
  seq.methods.push_back(evaluate_method(name, est, gt, a.stride, a.per_axis));
  if (a.diff) {
    const json other_json = read_json_file(*a.diff);
    const Trajectory other = trajectory_from_json(other_json);
    std::string other_name = method_name(other_json, *a.diff);
    if (other_name == name) other_name += "_b";
    seq.methods.push_back(evaluate_method(other_name, other, gt, a.stride, a.per_axis));
    seq.difference = method_difference(est, other);
  }
  report.sequences.push_back(seq);

  const fs::path out(a.out);
  if (out.extension() == ".json") {
    write_file(out, emit_report_json(report));
  } else {
    auto sibling = [&](const std::string& suffix) {
      return out.parent_path() / (out.stem().string() + suffix + out.extension().string());
    };
    write_file(out, emit_report_csv(report, ReportTable::Relative));
    write_file(sibling("_absolute"), emit_report_csv(report, ReportTable::Absolute));
    if (a.per_axis) write_file(sibling("_per_axis"), emit_report_csv(report, ReportTable::PerAxis));
    if (a.diff) write_file(sibling("_difference"), emit_report_csv(report, ReportTable::Difference));
  }
  for (const auto& m : seq.methods) {
    std::cerr << m.method << ": relative T " << m.relative.translation.rmse << " mm, R "
              << m.relative.rotation.rmse << " deg (n=" << m.relative.translation.n
              << ", gaps=" << m.relative.gaps << ")\n";
  }
  return 0;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const std::string& out_dir, const Common& c) {
  const Resolved r = resolve(c);
  for (const auto& f : write_synthetic_dataset(out_dir, r.config.scene, r.config.trajectory)) {
    std::cerr << "wrote " << (fs::path(out_dir) / f).string() << "\n";
  }
  return 0;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config,--params", c.config, "TOML configuration");
  app->add_option("--seed", c.seed, "RNG seed (falls back to the config file, then PLENREG_SEED)");
  app->add_option("--threads", c.threads, "worker threads (0: hardware concurrency)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extrinsic registration and evaluation for multi-camera plenoptic rigs"};
  app.require_subcommand(1);
  Common common;

  ParseMlaArgs mla;
  auto* parse_mla = app.add_subcommand("parse-mla", "parse an MLA calibration XML");
  parse_mla->add_option("xml", mla.xml, "calibration XML")->required();
  parse_mla->add_flag("--json", mla.as_json, "emit JSON instead of canonical XML");
  parse_mla->add_option("--out", mla.out, "output file (default stdout)");
  add_common(parse_mla, common);

  RegisterArgs reg;
  std::string method;
  auto* registration = app.add_subcommand("register", "estimate the extrinsic of camera X w.r.t. camera 0");
  registration->add_option("method", method, "ransac3d or pnp")
      ->required()
      ->check(CLI::IsMember({"ransac3d", "pnp"}));
  registration->add_option("--cloud0", reg.cloud0, "reference feature cloud")->required();
  registration->add_option("--cloudx,--cloudX", reg.cloudx, "feature cloud of camera X (ransac3d)");
  registration->add_option("--image,--image-features", reg.image, "image features of camera X (pnp)");
  registration->add_option("--cam0-pose,--calib0", reg.cam0_pose, "calibration pose of camera 0 (camera <- cloud0)")
      ->required();
  registration->add_option("--camx-pose,--calibX", reg.camx_pose, "calibration pose of camera X (camera <- cloudX)");
  registration->add_option("--intrinsics", reg.intrinsics, "intrinsics JSON of camera X (pnp)");
  registration->add_option("--ref-intrinsics", reg.ref_intrinsics, "intrinsics JSON of camera 0 (pnp)");
  registration->add_option("--cloud0-frame", reg.cloud0_frame, "frame label of cloud 0")->capture_default_str();
  registration->add_option("--cloudx-frame", reg.cloudx_frame, "frame label of cloud X")->capture_default_str();
  registration->add_option("--camera-frame", reg.camera_frame, "frame label of camera X")->capture_default_str();
  registration->add_option("--out", reg.out, "result JSON (default stdout)");
  registration->add_flag("--convention", reg.convention, "print the frame chain");
  registration->add_option("--threshold", reg.threshold, "inlier threshold (mm or px)");
  registration->add_option("--fm-threshold", reg.fm_threshold, "epipolar threshold, px (pnp)");
  registration->add_option("--confidence", reg.confidence);
  registration->add_option("--keep-ratio", reg.keep_ratio, "brute-force match keep ratio (ransac3d)");
  registration->add_option("--max-iterations", reg.max_iterations);
  registration->add_option("--min-inliers", reg.min_inliers);
  registration->add_option("--lm-max-iters", reg.lm_max_iters);
  registration->add_option("--knn-k", reg.knn_k);
  add_common(registration, common);

  AlignArgs al;
  auto* align = app.add_subcommand("align", "express tracker poses in the plate frame");
  align->add_option("--vicon", al.vicon, "tracker CSV")->required();
  align->add_option("--schema", al.schema, "tracker CSV schema (TOML)");
  align->add_option("--plate", al.plate, "marker plate JSON")->required();
  align->add_option("--object", al.object, "tracked object")->capture_default_str();
  align->add_option("--frames", al.frames, "camera frame count (default: all)");
  align->add_option("--factor", al.factor, "tracker samples per camera frame")->capture_default_str();
  align->add_option("--offset", al.offset, "tracker row of camera frame 0")->capture_default_str();
  align->add_option("--out", al.out, "trajectory JSON (default stdout)");
  add_common(align, common);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "relative and absolute pose errors");
  evaluate->add_option("--est", ev.est, "estimated trajectory JSON")->required();
  evaluate->add_option("--gt", ev.gt, "ground truth: trajectory JSON or tracker CSV")->required();
  evaluate->add_option("--schema", ev.align.schema, "tracker CSV schema (TOML)");
  evaluate->add_option("--plate", ev.align.plate, "marker plate JSON");
  evaluate->add_option("--object", ev.align.object, "tracked object")->capture_default_str();
  evaluate->add_option("--factor", ev.align.factor, "tracker samples per camera frame")->capture_default_str();
  evaluate->add_option("--offset", ev.align.offset, "tracker row of camera frame 0")->capture_default_str();
  evaluate->add_option("--out", ev.out, "report .csv or .json")->required();
  evaluate->add_flag("--per-axis", ev.per_axis, "per-axis absolute errors");
  evaluate->add_option("--diff", ev.diff, "second estimate for the method difference");
  evaluate->add_option("--stride", ev.stride, "frame stride of relative errors")->capture_default_str();
  evaluate->add_option("--sequence", ev.sequence, "sequence name in the report");
  add_common(evaluate, common);

  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "write a seeded synthetic dataset");
  synth->add_option("--spec", common.config, "scene/trajectory TOML");
  synth->add_option("--out-dir", out_dir, "output directory")->required();
  synth->add_option("--seed", common.seed, "RNG seed (falls back to the --spec file, then PLENREG_SEED)");
  synth->add_option("--threads", common.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (parse_mla->parsed()) return cmd_parse_mla(mla, common);
    if (registration->parsed()) return cmd_register(method, reg, common);
    if (align->parsed()) return cmd_align(al, common);
    if (evaluate->parsed()) return cmd_evaluate(ev, common);
    if (synth->parsed()) return cmd_synth(out_dir, common);
  } catch (const Error& e) {
    std::cerr << "error";
    if (!e.stage().empty()) std::cerr << " [stage " << e.stage() << "]";
    std::cerr << ": " << to_string(e.code()) << ": " << e.what() << "\n";
    return is_configuration_error(e.code()) ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoError: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
