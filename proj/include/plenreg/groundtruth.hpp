#pragma once

// Motion-capture ingestion and the plate-defined common frame.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plenreg/io.hpp"
#include "plenreg/pose.hpp"

namespace plenreg {

enum class RotationEncoding { Helical, EulerXyz, Quaternion };

// Column layout of the tracker export. Column names are built from
// `column_pattern` with {object} and {field} substituted; the fields are
// RX RY RZ TX TY TZ (helical, euler_xyz) or QW QX QY QZ TX TY TZ (quaternion).
struct ViconSchema {
  std::string frame_column = "Frame";
  std::string column_pattern = "{object}_{field}";
  RotationEncoding rotation = RotationEncoding::Helical;
  bool angles_in_degrees = true;
  double position_scale = 1.0;  // multiplies raw positions to get mm
  std::vector<std::string> objects;  // empty: every object found in the header
  bool strict = false;
  char handedness_axis = 'y';

  void validate() const;
  std::vector<std::string> fields() const;
  std::string column(const std::string& object, const std::string& field) const;
};

ViconSchema vicon_schema_from_toml(std::string_view text);
std::string vicon_schema_to_toml(const ViconSchema& schema);

// One tracker sample after handedness conversion. The pose maps object
// coordinates into the tracker frame ("vicon").
struct ViconSample {
  std::int64_t index = 0;
  std::string object;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  Posed pose() const;
};

// A row of a stream; std::nullopt marks an occlusion gap.
struct ViconEntry {
  std::int64_t index = 0;
  std::optional<ViconSample> sample;
};

struct ViconStream {
  std::string object;
  std::vector<ViconEntry> entries;
};

// Parsed streams plus the raw cells, kept so serialization is byte-stable.
struct ViconData {
  std::vector<ViconStream> streams;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string line_ending = "\n";
  bool trailing_newline = true;
  std::vector<std::string> warnings;

  const ViconStream& stream(const std::string& object) const;
};

inline const FrameId kViconFrame{"vicon"};
inline const FrameId kWorldFrame{"world"};

ViconData parse_vicon_csv(std::string_view bytes, const ViconSchema& schema = {});
std::string serialize_vicon_csv(const ViconData& data);

// Raw tracker rotation parameters to a matrix and back; `params` holds three
// angles or a (w, x, y, z) quaternion.
Eigen::Matrix3d rotation_from_vicon(const Eigen::VectorXd& params, const ViconSchema& schema);
Eigen::VectorXd rotation_to_vicon(const Eigen::Matrix3d& R, const ViconSchema& schema);

// Intrinsic XYZ Euler angles (radians): R = Rx(a) Ry(b) Rz(c).
Eigen::Matrix3d rotation_from_euler_xyz(const Eigen::Vector3d& abc);
Eigen::Vector3d euler_xyz_from_rotation(const Eigen::Matrix3d& R);

// Mirror across the plane normal to `axis`: R -> M R M, t -> M t with M the
// reflection. The map is an involution.
Posed convert_handedness(const Posed& raw, char axis = 'y');

struct SyncedFrame {
  int frame = 0;
  std::int64_t row = 0;    // position in the stream
  std::int64_t index = 0;  // tracker frame number of that row
  std::optional<Posed> pose;
};

// Camera frame k <-> stream row offset + k * factor.
std::vector<SyncedFrame> sync_frames(const ViconStream& stream, int n_frames, int factor = 8,
                                     int offset = 0);

struct MarkerPlate {
  Eigen::Vector3d P0, P1, P2, P3;
  Eigen::Vector3d aruco_to_vicon_offset = Eigen::Vector3d::Zero();
};

struct PlateCheck {
  Eigen::Vector3d expected_p1_local;
  double tolerance_mm = 5.0;
};

// Plate frame from the marker centers: origin P2, x towards P3, y towards P0.
// The pose maps plate coordinates into `parent`. With a check, P1 expressed
// in the plate frame must match the template within tolerance.
Posed plate_frame(const MarkerPlate& plate, const std::optional<PlateCheck>& check = {},
                  const FrameId& parent = kViconFrame, const FrameId& child = FrameId("plate"));

Eigen::Vector3d plate_local(const Posed& plate, const Eigen::Vector3d& p);

// inverse(plate shifted by R * offset) * pose, relabelled into `world`.
Posed to_common_frame(const Posed& pose, const Posed& plate, const Eigen::Vector3d& offset,
                      const FrameId& world = kWorldFrame);
Posed from_common_frame(const Posed& pose, const Posed& plate, const Eigen::Vector3d& offset);

MarkerPlate marker_plate_from_json(const json& j);
std::optional<PlateCheck> plate_check_from_json(const json& j);
json marker_plate_to_json(const MarkerPlate& plate, const std::optional<PlateCheck>& check);

}  // namespace plenreg
