#include "plenreg/eval_metrics.hpp"

#include <cmath>
#include <sstream>

#include "plenreg/groundtruth.hpp"
#include "plenreg/pose_io.hpp"

namespace plenreg {

namespace {

void require_length(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::LengthMismatch, "trajectories differ in length: " + std::to_string(a.size()) +
                                        " vs " + std::to_string(b.size()));
  }
}

const char* kAxes[3] = {"x", "y", "z"};

}  // namespace

ErrorStats compute_stats(const std::vector<double>& values, std::string unit) {
  ErrorStats s;
  s.unit = std::move(unit);
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0, sq = 0.0;
  for (double v : values) {
    sum += v;
    sq += v * v;
  }
  s.mean = sum / n;
  s.rmse = std::sqrt(sq / n);
  if (values.size() > 1) {
    double dev = 0.0;
    for (double v : values) dev += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(dev / (n - 1.0));
  }
  return s;
}

PoseErrorStats relative_errors(const Trajectory& est, const Trajectory& gt, int stride) {
  require_length(est, gt);
  if (stride < 1) fail(ErrorCode::InvalidArgument, "stride must be at least 1");
  if (est.size() < 2) fail(ErrorCode::LengthMismatch, "relative errors need at least two frames");
  std::vector<double> te, re;
  int gaps = 0;
  for (std::size_t k = 0; k + static_cast<std::size_t>(stride) < est.size(); ++k) {
    const std::size_t j = k + static_cast<std::size_t>(stride);
    if (!est[k] || !est[j] || !gt[k] || !gt[j]) {
      ++gaps;
      continue;
    }
    const Posed d_est = compose(inverse(*est[k]), *est[j]);
    const Posed d_gt = compose(inverse(*gt[k]), *gt[j]);
    te.push_back(translation_error(d_est, d_gt));
    re.push_back(rotation_angle(d_est, d_gt));
  }
  return {compute_stats(te, "mm"), compute_stats(re, "deg"), gaps};
}

PoseErrorStats absolute_errors(const Trajectory& est, const Trajectory& gt) {
  require_length(est, gt);
  std::vector<double> te, re;
  int gaps = 0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    if (!est[k] || !gt[k]) {
      ++gaps;
      continue;
    }
    te.push_back(translation_error(*est[k], *gt[k]));
    re.push_back(rotation_angle(*est[k], *gt[k]));
  }
  return {compute_stats(te, "mm"), compute_stats(re, "deg"), gaps};
}

Eigen::Vector3d axis_translation_error(const Posed& est, const Posed& gt) {
  require_same_frames(est, gt);
  return est.rotation().transpose() * (est.translation() - gt.translation());
}

Eigen::Vector3d axis_rotation_error_deg(const Posed& est, const Posed& gt) {
  require_same_frames(est, gt);
  const Eigen::Matrix3d err = gt.rotation().transpose() * est.rotation();
  return euler_xyz_from_rotation(err) * (180.0 / kPi<double>);
}

PerAxisStats per_axis_errors(const Trajectory& est, const Trajectory& gt) {
  require_length(est, gt);
  std::array<std::vector<double>, 3> te, re;
  PerAxisStats out;
  for (std::size_t k = 0; k < est.size(); ++k) {
    if (!est[k] || !gt[k]) {
      ++out.gaps;
      continue;
    }
    const Eigen::Vector3d t = axis_translation_error(*est[k], *gt[k]);
    const Eigen::Vector3d r = axis_rotation_error_deg(*est[k], *gt[k]);
    for (int a = 0; a < 3; ++a) {
      te[static_cast<std::size_t>(a)].push_back(t(a));
      re[static_cast<std::size_t>(a)].push_back(r(a));
    }
  }
  for (std::size_t a = 0; a < 3; ++a) {
    out.translation[a] = compute_stats(te[a], "mm");
    out.rotation[a] = compute_stats(re[a], "deg");
  }
  return out;
}

PoseErrorStats method_difference(const Trajectory& a, const Trajectory& b) {
  return absolute_errors(a, b);
}

namespace {

json stats_json(const ErrorStats& s) {
  return {{"rmse", s.rmse}, {"mean", s.mean}, {"sd", s.sd}, {"n", s.n}, {"unit", s.unit}};
}

json pose_stats_json(const PoseErrorStats& s) {
  return {{"translation", stats_json(s.translation)},
          {"rotation", stats_json(s.rotation)},
          {"gaps", s.gaps}};
}

json per_axis_json(const PerAxisStats& s) {
  json t = json::object(), r = json::object();
  for (std::size_t a = 0; a < 3; ++a) {
    t[kAxes[a]] = stats_json(s.translation[a]);
    r[kAxes[a]] = stats_json(s.rotation[a]);
  }
  return {{"translation", t}, {"rotation", r}, {"gaps", s.gaps}};
}

std::vector<std::string> method_names(const EvalReport& report) {
  std::vector<std::string> names;
  for (const auto& seq : report.sequences) {
    for (const auto& m : seq.methods) {
      if (std::find(names.begin(), names.end(), m.method) == names.end()) names.push_back(m.method);
    }
  }
  return names;
}

const MethodReport* find_method(const SequenceReport& seq, const std::string& name) {
  for (const auto& m : seq.methods) {
    if (m.method == name) return &m;
  }
  return nullptr;
}

void stats_cells(std::vector<std::string>& row, const ErrorStats* s) {
  row.push_back(s ? format_double(s->rmse) : "");
  row.push_back(s ? format_double(s->sd) : "");
}

void pose_cells(std::vector<std::string>& row, const PoseErrorStats* s) {
  stats_cells(row, s ? &s->translation : nullptr);
  stats_cells(row, s ? &s->rotation : nullptr);
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out + "\n";
}

}  // namespace

json report_to_json(const EvalReport& report) {
  json seqs = json::array();
  for (const auto& seq : report.sequences) {
    json methods = json::array();
    for (const auto& m : seq.methods) {
      json jm{{"method", m.method}, {"relative", pose_stats_json(m.relative)}};
      if (m.absolute) jm["absolute"] = pose_stats_json(*m.absolute);
      if (m.per_axis) jm["per_axis"] = per_axis_json(*m.per_axis);
      methods.push_back(std::move(jm));
    }
    json js{{"sequence", seq.sequence}, {"methods", methods}};
    if (seq.difference) js["difference"] = pose_stats_json(*seq.difference);
    seqs.push_back(std::move(js));
  }
  return {{"stride", report.stride}, {"sequences", seqs}};
}

std::string emit_report_json(const EvalReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

std::string emit_report_csv(const EvalReport& report, ReportTable table) {
  const auto names = method_names(report);
  std::vector<std::string> header{"sequence"};
  auto pose_header = [&](const std::string& p) {
    for (const char* h : {"_T_RMSE_mm", "_T_SD_mm", "_R_RMSE_deg", "_R_SD_deg"}) header.push_back(p + h);
  };
  switch (table) {
    case ReportTable::Relative:
    case ReportTable::Absolute:
      for (const auto& m : names) pose_header(m);
      break;
    case ReportTable::PerAxis:
      for (const auto& m : names) {
        for (const char* a : kAxes) {
          header.push_back(m + "_T" + a + "_RMSE_mm");
          header.push_back(m + "_T" + a + "_SD_mm");
        }
        for (const char* a : kAxes) {
          header.push_back(m + "_R" + a + "_RMSE_deg");
          header.push_back(m + "_R" + a + "_SD_deg");
        }
      }
      break;
    case ReportTable::Difference:
      if (!report.sequences.empty()) pose_header("difference");
      break;
  }

  std::string out = join(header);
  for (const auto& seq : report.sequences) {
    std::vector<std::string> row{seq.sequence};
    if (table == ReportTable::Difference) {
      pose_cells(row, seq.difference ? &*seq.difference : nullptr);
    } else {
      for (const auto& name : names) {
        const MethodReport* m = find_method(seq, name);
        if (table == ReportTable::Relative) {
          pose_cells(row, m ? &m->relative : nullptr);
        } else if (table == ReportTable::Absolute) {
          pose_cells(row, m && m->absolute ? &*m->absolute : nullptr);
        } else {
          const PerAxisStats* pa = m && m->per_axis ? &*m->per_axis : nullptr;
          for (std::size_t a = 0; a < 3; ++a) stats_cells(row, pa ? &pa->translation[a] : nullptr);
          for (std::size_t a = 0; a < 3; ++a) stats_cells(row, pa ? &pa->rotation[a] : nullptr);
        }
      }
    }
    out += join(row);
  }
  return out;
}

json trajectory_to_json(const Trajectory& t, const std::string& method) {
  json poses = json::array();
  for (const auto& p : t) poses.push_back(p ? pose_to_json(*p) : json(nullptr));
  json j{{"poses", poses}};
  if (!method.empty()) j["method"] = method;
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  const json* poses = &j;
  if (j.is_object()) {
    if (!j.contains("poses")) fail(ErrorCode::MissingField, "trajectory: poses");
    poses = &j.at("poses");
  }
  if (!poses->is_array()) fail(ErrorCode::ConfigError, "trajectory poses must be an array");
  Trajectory t;
  for (const auto& p : *poses) {
    if (p.is_null()) {
      t.emplace_back(std::nullopt);
    } else {
      t.emplace_back(pose_from_json(p));
    }
  }
  return t;
}

}  // namespace plenreg
