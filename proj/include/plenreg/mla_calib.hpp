#pragma once

// Micro lens array calibration file: parsing, serialization and the lens
// grid geometry it describes.

#include <Eigen/Core>

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "plenreg/io.hpp"
#include "plenreg/plenoptic.hpp"

namespace plenreg {

struct LensType {
  int id = 0;                                      // 1, 2 or 3
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();  // lens diameters, relative to type 1
  double depth_min = 0.0;                          // virtual depth
  double depth_max = 0.0;

  bool operator==(const LensType&) const = default;
};

// All fields keep the units of the file: offset/diameter/lens_border in
// pixels, rotation in radians, tcp and depth ranges in virtual depth, grid
// vectors in lens diameters. The MLA frame has x to the right and y up.
struct MlaCalibration {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
  double diameter = 0.0;
  double rotation = 0.0;
  double lens_border = 0.0;
  double tcp = 0.0;
  Eigen::Vector2d lens_base_x = Eigen::Vector2d::Zero();
  Eigen::Vector2d lens_base_y = Eigen::Vector2d::Zero();
  Eigen::Vector2d sub_grid_base = Eigen::Vector2d::Zero();
  std::array<LensType, 3> lens_types{};

  const LensType& lens_type(int id) const;
  bool operator==(const MlaCalibration&) const = default;
};

struct MlaParseResult {
  MlaCalibration calibration;
  std::vector<std::string> warnings;  // ignored elements and normalizations
};

// Vectors may be written as child elements (<x>, <y>) or attributes.
// Errors: MalformedXml, MissingField(name), OutOfRange(name).
MlaParseResult parse_mla_xml(std::string_view bytes);

// Canonical element-encoded XML with shortest round-trip decimals.
std::string serialize_mla_xml(const MlaCalibration& cal);

json mla_to_json(const MlaCalibration& cal);

struct ImageSize {
  int width = 0;
  int height = 0;
};

// Center of lens (i, j) of the given type relative to the image center, in
// the MLA frame (y up), pixels:
//   offset + Rot(rotation) * diameter * (i*lens_base_x + j*lens_base_y + type_offset)
Eigen::Vector2d lens_center_mla(const MlaCalibration& cal, int type_id, int i, int j);

// Same center in pixel coordinates (rows grow downward, so the MLA y
// component is negated). The image center is (width / 2, height / 2).
PixelPoint lens_center(const MlaCalibration& cal, int type_id, int i, int j,
                       ImageSize image);

// Ids of every lens type whose inclusive depth range contains v.
std::vector<int> lens_types_for_depth(const MlaCalibration& cal, double v);

}  // namespace plenreg
