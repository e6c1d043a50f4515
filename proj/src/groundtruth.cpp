#include "plenreg/groundtruth.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "toml_util.hpp"

namespace plenreg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    fail(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ", column '" + column +
                                      "': not a number: '" + t + "'");
  }
  return v;
}

std::int64_t parse_index(const std::string& cell, std::size_t line_no) {
  const std::string t = trim(cell);
  std::int64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    fail(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": bad frame index '" + t + "'");
  }
  return v;
}

Eigen::Matrix3d mirror(char axis) {
  Eigen::Matrix3d M = Eigen::Matrix3d::Identity();
  switch (axis) {
    case 'x': M(0, 0) = -1.0; break;
    case 'y': M(1, 1) = -1.0; break;
    case 'z': M(2, 2) = -1.0; break;
    default: fail(ErrorCode::InvalidArgument, std::string("handedness axis must be x, y or z, got '") + axis + "'");
  }
  return M;
}

// Splits a header column into (object, field) according to the pattern.
std::optional<std::pair<std::string, std::string>> match_column(
    const std::string& column, const ViconSchema& schema) {
  const std::string& p = schema.column_pattern;
  const auto po = p.find("{object}");
  const auto pf = p.find("{field}");
  for (const auto& field : schema.fields()) {
    if (po < pf) {
      const std::string pre = p.substr(0, po);
      const std::string mid = p.substr(po + 8, pf - po - 8);
      const std::string post = p.substr(pf + 7);
      const std::string tail = mid + field + post;
      if (column.size() > pre.size() + tail.size() && column.starts_with(pre) &&
          column.ends_with(tail)) {
        return std::make_pair(column.substr(pre.size(), column.size() - pre.size() - tail.size()), field);
      }
    } else {
      const std::string pre = p.substr(0, pf);
      const std::string mid = p.substr(pf + 7, po - pf - 7);
      const std::string post = p.substr(po + 8);
      const std::string head = pre + field + mid;
      if (column.size() > head.size() + post.size() && column.starts_with(head) &&
          column.ends_with(post)) {
        return std::make_pair(column.substr(head.size(), column.size() - head.size() - post.size()), field);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

void ViconSchema::validate() const {
  if (frame_column.empty()) fail(ErrorCode::ConfigError, "frame_column must not be empty");
  const auto po = column_pattern.find("{object}");
  const auto pf = column_pattern.find("{field}");
  if (po == std::string::npos || pf == std::string::npos) {
    fail(ErrorCode::ConfigError, "column_pattern must contain {object} and {field}");
  }
  if (!(position_scale > 0.0)) fail(ErrorCode::ConfigError, "position scale must be positive");
  if (handedness_axis != 'x' && handedness_axis != 'y' && handedness_axis != 'z') {
    fail(ErrorCode::ConfigError, "handedness_axis must be x, y or z");
  }
}

std::vector<std::string> ViconSchema::fields() const {
  if (rotation == RotationEncoding::Quaternion) return {"QW", "QX", "QY", "QZ", "TX", "TY", "TZ"};
  return {"RX", "RY", "RZ", "TX", "TY", "TZ"};
}

std::string ViconSchema::column(const std::string& object, const std::string& field) const {
  std::string out = column_pattern;
  out.replace(out.find("{object}"), 8, object);
  out.replace(out.find("{field}"), 7, field);
  return out;
}

ViconSchema vicon_schema_from_toml(std::string_view text) {
  const toml::table t = tomlu::parse(text, "vicon schema");
  tomlu::allow_keys(t, {"frame_column", "column_pattern", "rotation", "angle_unit", "position_unit",
                        "objects", "strict", "handedness_axis"},
                    "vicon schema");
  ViconSchema s;
  tomlu::read(t, "frame_column", s.frame_column);
  tomlu::read(t, "column_pattern", s.column_pattern);
  std::string rotation = "helical", angle = "deg", unit = "mm", axis = "y";
  tomlu::read(t, "rotation", rotation);
  tomlu::read(t, "angle_unit", angle);
  tomlu::read(t, "position_unit", unit);
  tomlu::read(t, "handedness_axis", axis);
  tomlu::read(t, "strict", s.strict);

  if (rotation == "helical") s.rotation = RotationEncoding::Helical;
  else if (rotation == "euler_xyz") s.rotation = RotationEncoding::EulerXyz;
  else if (rotation == "quaternion") s.rotation = RotationEncoding::Quaternion;
  else fail(ErrorCode::ConfigError, "rotation must be helical, euler_xyz or quaternion");

  if (angle == "deg") s.angles_in_degrees = true;
  else if (angle == "rad") s.angles_in_degrees = false;
  else fail(ErrorCode::ConfigError, "angle_unit must be deg or rad");

  if (unit == "mm") s.position_scale = 1.0;
  else if (unit == "cm") s.position_scale = 10.0;
  else if (unit == "m") s.position_scale = 1000.0;
  else fail(ErrorCode::ConfigError, "position_unit must be mm, cm or m");

  if (axis.size() != 1) fail(ErrorCode::ConfigError, "handedness_axis must be x, y or z");
  s.handedness_axis = axis[0];

  if (const toml::node* n = t.get("objects")) {
    const toml::array* a = n->as_array();
    if (!a) fail(ErrorCode::ConfigError, "objects must be an array of strings");
    for (const auto& e : *a) {
      if (!e.is_string()) fail(ErrorCode::ConfigError, "objects must be an array of strings");
      s.objects.push_back(*e.value<std::string>());
    }
  }
  s.validate();
  return s;
}

std::string vicon_schema_to_toml(const ViconSchema& s) {
  std::ostringstream out;
  out << "frame_column = \"" << s.frame_column << "\"\n";
  out << "column_pattern = \"" << s.column_pattern << "\"\n";
  out << "rotation = \""
      << (s.rotation == RotationEncoding::Helical    ? "helical"
          : s.rotation == RotationEncoding::EulerXyz ? "euler_xyz"
                                                     : "quaternion")
      << "\"\n";
  out << "angle_unit = \"" << (s.angles_in_degrees ? "deg" : "rad") << "\"\n";
  out << "position_unit = \""
      << (s.position_scale == 1000.0 ? "m" : s.position_scale == 10.0 ? "cm" : "mm") << "\"\n";
  out << "objects = [";
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    out << (i ? ", " : "") << '"' << s.objects[i] << '"';
  }
  out << "]\n";
  out << "strict = " << (s.strict ? "true" : "false") << "\n";
  out << "handedness_axis = \"" << s.handedness_axis << "\"\n";
  return out.str();
}

Posed ViconSample::pose() const {
  return Posed(kViconFrame, FrameId(object), rotation, position);
}

const ViconStream& ViconData::stream(const std::string& object) const {
  for (const auto& s : streams) {
    if (s.object == object) return s;
  }
  fail(ErrorCode::UnknownObject, "no tracker stream for object '" + object + "'");
}

Eigen::Matrix3d rotation_from_euler_xyz(const Eigen::Vector3d& abc) {
  return (Eigen::AngleAxisd(abc.x(), Eigen::Vector3d::UnitX()) *
          Eigen::AngleAxisd(abc.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(abc.z(), Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

Eigen::Vector3d euler_xyz_from_rotation(const Eigen::Matrix3d& R) {
  const double b = std::asin(std::clamp(R(0, 2), -1.0, 1.0));
  double a = 0.0, c = 0.0;
  if (std::abs(R(0, 2)) < 1.0 - 1e-12) {
    a = std::atan2(-R(1, 2), R(2, 2));
    c = std::atan2(-R(0, 1), R(0, 0));
  } else {
    // Gimbal lock: only a +/- c is observable, put it all in a.
    a = std::atan2(R(2, 1), R(1, 1));
  }
  return {a, b, c};
}

Eigen::Matrix3d rotation_from_vicon(const Eigen::VectorXd& params, const ViconSchema& schema) {
  const double k = schema.angles_in_degrees ? kPi<double> / 180.0 : 1.0;
  switch (schema.rotation) {
    case RotationEncoding::Helical:
      return so3_exp(Eigen::Vector3d(k * params.head<3>()));
    case RotationEncoding::EulerXyz:
      return rotation_from_euler_xyz(k * params.head<3>());
    case RotationEncoding::Quaternion: {
      const Eigen::Quaterniond q(params(0), params(1), params(2), params(3));
      if (!(q.norm() > 1e-12)) fail(ErrorCode::MalformedCsv, "zero quaternion");
      return q.normalized().toRotationMatrix();
    }
  }
  return Eigen::Matrix3d::Identity();
}

Eigen::VectorXd rotation_to_vicon(const Eigen::Matrix3d& R, const ViconSchema& schema) {
  const double k = schema.angles_in_degrees ? 180.0 / kPi<double> : 1.0;
  switch (schema.rotation) {
    case RotationEncoding::Helical:
      return k * so3_log(R);
    case RotationEncoding::EulerXyz:
      return k * euler_xyz_from_rotation(R);
    case RotationEncoding::Quaternion: {
      Eigen::Quaterniond q(R);
      if (q.w() < 0.0) q.coeffs() *= -1.0;
      return Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
    }
  }
  return {};
}

ViconData parse_vicon_csv(std::string_view bytes, const ViconSchema& schema) {
  schema.validate();
  ViconData data;
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start < bytes.size()) {
      const auto nl = bytes.find('\n', start);
      if (nl == std::string_view::npos) {
        lines.push_back(bytes.substr(start));
        data.trailing_newline = false;
        break;
      }
      lines.push_back(bytes.substr(start, nl - start));
      start = nl + 1;
    }
  }
  if (lines.empty()) fail(ErrorCode::MalformedCsv, "empty tracker file");
  if (lines.front().ends_with('\r')) data.line_ending = "\r\n";
  for (auto& l : lines) {
    if (l.ends_with('\r')) l.remove_suffix(1);
  }

  data.header = split(lines.front());
  const auto frame_it = std::find_if(data.header.begin(), data.header.end(), [&](const std::string& c) {
    return trim(c) == schema.frame_column;
  });
  if (frame_it == data.header.end()) {
    fail(ErrorCode::MalformedCsv, "header has no '" + schema.frame_column + "' column");
  }
  const auto frame_col = static_cast<std::size_t>(frame_it - data.header.begin());

  // object -> field -> column index, in order of first appearance.
  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, std::size_t>> columns;
  for (std::size_t c = 0; c < data.header.size(); ++c) {
    if (c == frame_col) continue;
    const std::string name = trim(data.header[c]);
    const auto m = match_column(name, schema);
    if (!m) {
      data.warnings.push_back("ignored column '" + name + "'");
      continue;
    }
    if (!columns.count(m->first)) order.push_back(m->first);
    if (!columns[m->first].emplace(m->second, c).second) {
      fail(ErrorCode::MalformedCsv, "duplicate column '" + name + "'");
    }
  }

  std::vector<std::string> objects;
  for (const auto& obj : order) {
    const bool listed = schema.objects.empty() ||
                        std::find(schema.objects.begin(), schema.objects.end(), obj) != schema.objects.end();
    if (listed) {
      objects.push_back(obj);
    } else if (schema.strict) {
      fail(ErrorCode::UnknownObject, "unexpected object '" + obj + "' in header");
    } else {
      data.warnings.push_back("ignored object '" + obj + "'");
    }
  }
  for (const auto& obj : schema.objects) {
    if (!columns.count(obj)) {
      if (schema.strict) fail(ErrorCode::UnknownObject, "object '" + obj + "' missing from header");
      data.warnings.push_back("object '" + obj + "' missing from header");
    }
  }
  const auto fields = schema.fields();
  for (const auto& obj : objects) {
    for (const auto& f : fields) {
      if (!columns[obj].count(f)) {
        fail(ErrorCode::MalformedCsv, "missing column '" + schema.column(obj, f) + "'");
      }
    }
    data.streams.push_back({obj, {}});
  }

  const std::size_t n_lines = lines.size();
  const Eigen::Matrix3d M = mirror(schema.handedness_axis);
  std::optional<std::int64_t> previous;
  for (std::size_t li = 1; li < n_lines; ++li) {
    const std::size_t line_no = li + 1;
    if (lines[li].empty()) fail(ErrorCode::MalformedCsv, "blank line " + std::to_string(line_no));
    auto cells = split(lines[li]);
    if (cells.size() != data.header.size()) {
      fail(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " fields, header has " +
                                        std::to_string(data.header.size()));
    }
    const std::int64_t index = parse_index(cells[frame_col], line_no);
    if (previous && index <= *previous) {
      fail(ErrorCode::MalformedCsv, "frame index not strictly increasing at line " + std::to_string(line_no));
    }
    previous = index;

    for (std::size_t s = 0; s < objects.size(); ++s) {
      const auto& cols = columns[objects[s]];
      bool blank = false;
      for (const auto& f : fields) blank = blank || trim(cells[cols.at(f)]).empty();
      ViconEntry entry{index, std::nullopt};
      if (!blank) {
        Eigen::VectorXd rot(fields.size() - 3);
        for (std::size_t f = 0; f + 3 < fields.size(); ++f) {
          rot(static_cast<Eigen::Index>(f)) = parse_cell(cells[cols.at(fields[f])], line_no, fields[f]);
        }
        Eigen::Vector3d t;
        for (int a = 0; a < 3; ++a) {
          const auto& f = fields[fields.size() - 3 + static_cast<std::size_t>(a)];
          t(a) = schema.position_scale * parse_cell(cells[cols.at(f)], line_no, f);
        }
        const Eigen::Matrix3d R = rotation_from_vicon(rot, schema);
        entry.sample = ViconSample{index, objects[s], M * t, M * R * M};
      }
      data.streams[s].entries.push_back(std::move(entry));
    }
    data.rows.push_back(std::move(cells));
  }
  return data;
}

std::string serialize_vicon_csv(const ViconData& data) {
  std::string out;
  auto join = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
  };
  join(data.header);
  for (const auto& row : data.rows) {
    out += data.line_ending;
    join(row);
  }
  if (data.trailing_newline) out += data.line_ending;
  return out;
}

Posed convert_handedness(const Posed& raw, char axis) {
  const Eigen::Matrix3d M = mirror(axis);
  return Posed(raw.parent(), raw.child(), M * raw.rotation() * M, M * raw.translation());
}

std::vector<SyncedFrame> sync_frames(const ViconStream& stream, int n_frames, int factor,
                                     int offset) {
  if (factor < 1) fail(ErrorCode::InvalidArgument, "factor must be at least 1");
  if (offset < 0) fail(ErrorCode::InvalidArgument, "offset must be non-negative");
  if (n_frames < 0) fail(ErrorCode::InvalidArgument, "frame count must be non-negative");
  std::vector<SyncedFrame> frames;
  frames.reserve(static_cast<std::size_t>(n_frames));
  for (int k = 0; k < n_frames; ++k) {
    const std::int64_t row = offset + static_cast<std::int64_t>(k) * factor;
    if (row >= static_cast<std::int64_t>(stream.entries.size())) {
      fail(ErrorCode::IndexOutOfRange, "frame " + std::to_string(k) + " maps to sample " +
                                           std::to_string(row) + " but the stream of '" +
                                           stream.object + "' has " +
                                           std::to_string(stream.entries.size()));
    }
    const auto& e = stream.entries[static_cast<std::size_t>(row)];
    SyncedFrame f{k, row, e.index, std::nullopt};
    if (e.sample) f.pose = e.sample->pose();
    frames.push_back(std::move(f));
  }
  return frames;
}

Posed plate_frame(const MarkerPlate& plate, const std::optional<PlateCheck>& check,
                  const FrameId& parent, const FrameId& child) {
  const Eigen::Vector3d dx = plate.P3 - plate.P2;
  const Eigen::Vector3d dy = plate.P0 - plate.P2;
  if (!(dx.norm() > 1e-9) || !(dy.norm() > 1e-9)) {
    fail(ErrorCode::CollinearMarkers, "coincident plate markers");
  }
  const Eigen::Vector3d x = dx / dx.norm();
  const Eigen::Vector3d y0 = dy / dy.norm();
  Eigen::Vector3d z = x.cross(y0);
  if (!(z.norm() > 1e-9)) fail(ErrorCode::CollinearMarkers, "plate markers P2, P3, P0 are collinear");
  z /= z.norm();
  const Eigen::Vector3d y = z.cross(x);

  Eigen::Matrix3d R;
  R << x, y, z;
  Posed frame(parent, child, R, plate.P2);
  if (check) {
    const Eigen::Vector3d local = plate_local(frame, plate.P1);
    if ((local - check->expected_p1_local).norm() > check->tolerance_mm) {
      std::ostringstream msg;
      msg << "P1 in plate frame is (" << local.x() << ", " << local.y() << ", " << local.z()
          << "), expected (" << check->expected_p1_local.x() << ", "
          << check->expected_p1_local.y() << ", " << check->expected_p1_local.z()
          << ") within " << check->tolerance_mm << " mm";
      fail(ErrorCode::ValidationFailed, msg.str());
    }
  }
  return frame;
}

Eigen::Vector3d plate_local(const Posed& plate, const Eigen::Vector3d& p) {
  return plate.rotation().transpose() * (p - plate.translation());
}

namespace {

Posed shifted_plate(const Posed& plate, const Eigen::Vector3d& offset, const FrameId& world) {
  return Posed(plate.parent(), world, plate.rotation(),
               plate.translation() + plate.rotation() * offset);
}

}  // namespace

Posed to_common_frame(const Posed& pose, const Posed& plate, const Eigen::Vector3d& offset,
                      const FrameId& world) {
  return compose(inverse(shifted_plate(plate, offset, world)), pose);
}

Posed from_common_frame(const Posed& pose, const Posed& plate, const Eigen::Vector3d& offset) {
  return compose(shifted_plate(plate, offset, pose.parent()), pose);
}

namespace {

Eigen::Vector3d vec3(const json& j, const std::string& key) {
  if (!j.contains(key)) fail(ErrorCode::MissingField, "plate: " + key);
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 3) fail(ErrorCode::ConfigError, "plate: " + key + " must be 3 numbers");
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) {
      fail(ErrorCode::ConfigError, "plate: " + key + " must be 3 numbers");
    }
    out(i) = v[static_cast<std::size_t>(i)].get<double>();
  }
  return out;
}

json arr(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

MarkerPlate marker_plate_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "plate description must be an object");
  return MarkerPlate{vec3(j, "P0"), vec3(j, "P1"), vec3(j, "P2"), vec3(j, "P3"),
                     vec3(j, "aruco_to_vicon_offset")};
}

std::optional<PlateCheck> plate_check_from_json(const json& j) {
  if (!j.contains("expected_P1_local")) return std::nullopt;
  PlateCheck c{vec3(j, "expected_P1_local"), 5.0};
  if (j.contains("tolerance_mm")) {
    if (!j["tolerance_mm"].is_number()) fail(ErrorCode::ConfigError, "plate: tolerance_mm must be a number");
    c.tolerance_mm = j["tolerance_mm"].get<double>();
  }
  return c;
}

json marker_plate_to_json(const MarkerPlate& plate, const std::optional<PlateCheck>& check) {
  json j{{"P0", arr(plate.P0)},
         {"P1", arr(plate.P1)},
         {"P2", arr(plate.P2)},
         {"P3", arr(plate.P3)},
         {"aruco_to_vicon_offset", arr(plate.aruco_to_vicon_offset)}};
  if (check) {
    j["expected_P1_local"] = arr(check->expected_p1_local);
    j["tolerance_mm"] = check->tolerance_mm;
  }
  return j;
}

}  // namespace plenreg
