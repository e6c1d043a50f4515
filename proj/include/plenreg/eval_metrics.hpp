#pragma once

// Trajectory error statistics and report rendering.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "plenreg/io.hpp"
#include "plenreg/pose.hpp"

namespace plenreg {

// sd uses the (n - 1) estimator; n <= 1 gives sd = 0 and n = 0 all zeros.
struct ErrorStats {
  double rmse = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
  std::string unit;
};

ErrorStats compute_stats(const std::vector<double>& values, std::string unit);

// Per-frame poses; std::nullopt marks a frame without ground truth or
// estimate (excluded and counted as a gap).
using Trajectory = std::vector<std::optional<Posed>>;

struct PoseErrorStats {
  ErrorStats translation;  // mm
  ErrorStats rotation;     // deg
  int gaps = 0;
};

struct PerAxisStats {
  std::array<ErrorStats, 3> translation;  // signed components in the estimated camera frame, mm
  std::array<ErrorStats, 3> rotation;     // intrinsic XYZ Euler angles of the error rotation, deg
  int gaps = 0;
};

// Motion between frames k and k + stride compared with the ground-truth motion.
PoseErrorStats relative_errors(const Trajectory& est, const Trajectory& gt, int stride = 1);
PoseErrorStats absolute_errors(const Trajectory& est, const Trajectory& gt);
PerAxisStats per_axis_errors(const Trajectory& est, const Trajectory& gt);
PoseErrorStats method_difference(const Trajectory& a, const Trajectory& b);

// Per-frame signed translation error R_est^T (t_est - t_gt) and Euler error
// angles (deg) of R_gt^T R_est.
Eigen::Vector3d axis_translation_error(const Posed& est, const Posed& gt);
Eigen::Vector3d axis_rotation_error_deg(const Posed& est, const Posed& gt);

struct MethodReport {
  std::string method;
  PoseErrorStats relative;
  std::optional<PoseErrorStats> absolute;
  std::optional<PerAxisStats> per_axis;
};

struct SequenceReport {
  std::string sequence;
  std::vector<MethodReport> methods;
  std::optional<PoseErrorStats> difference;  // between the first two methods
};

struct EvalReport {
  int stride = 1;
  std::vector<SequenceReport> sequences;
};

enum class ReportTable { Relative, Absolute, PerAxis, Difference };

json report_to_json(const EvalReport& report);
std::string emit_report_json(const EvalReport& report);
// Wide layout: one row per sequence, a column group per method.
std::string emit_report_csv(const EvalReport& report, ReportTable table = ReportTable::Relative);

json trajectory_to_json(const Trajectory& t, const std::string& method = {});
Trajectory trajectory_from_json(const json& j);

}  // namespace plenreg
