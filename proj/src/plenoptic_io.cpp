#include "plenreg/plenoptic_io.hpp"

namespace plenreg {

namespace {

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    fail(ErrorCode::ConfigError, std::string("intrinsics field '") + key + "' missing");
  }
  return j.at(key).get<double>();
}

}  // namespace

CameraModel camera_model_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "intrinsics must be a JSON object");
  CameraModel m;
  auto& k = m.intrinsics;
  k.B = number(j, "B");
  k.b_L0 = number(j, "b_L0");
  k.c_x = number(j, "c_x");
  k.c_y = number(j, "c_y");
  k.pixel_size_um = number(j, "pixel_size_um");
  k.width = static_cast<int>(number(j, "width"));
  k.height = static_cast<int>(number(j, "height"));
  if (j.contains("f_px")) {
    k.f_px = number(j, "f_px");
  } else if (j.contains("focal_length_mm")) {
    k.f_px = focal_length_px(number(j, "focal_length_mm"), k.pixel_size_um);
  } else {
    fail(ErrorCode::ConfigError, "intrinsics need f_px or focal_length_mm");
  }
  if (j.contains("distortion")) {
    const json& d = j.at("distortion");
    // Absent coefficients are zero.
    auto coeff = [&](const char* key) {
      return d.contains(key) ? d.at(key).get<double>() : 0.0;
    };
    m.distortion = {coeff("k1"), coeff("k2"), coeff("k3"), coeff("p1"), coeff("p2")};
  }
  try {
    k.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
  return m;
}

json camera_model_to_json(const CameraModel& m) {
  const auto& k = m.intrinsics;
  const auto& d = m.distortion;
  return json{{"B", k.B},
              {"b_L0", k.b_L0},
              {"c_x", k.c_x},
              {"c_y", k.c_y},
              {"f_px", k.f_px},
              {"pixel_size_um", k.pixel_size_um},
              {"width", k.width},
              {"height", k.height},
              {"distortion", {{"k1", d.k1}, {"k2", d.k2}, {"k3", d.k3}, {"p1", d.p1}, {"p2", d.p2}}}};
}

}  // namespace plenreg
