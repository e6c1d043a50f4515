#include "plenreg/mla_calib.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace plenreg {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kKnownElements = {
    "offset",      "diameter",    "rotation",      "lens_border", "tcp",
    "lens_base_x", "lens_base_y", "sub_grid_base", "lens_type"};

bool is_meta(const std::string& key) {
  return key == "<xmlattr>" || key == "<xmlcomment>";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    fail(ErrorCode::MalformedXml, "field '" + field + "' is not a number: '" + t + "'");
  }
  if (!std::isfinite(value)) {
    fail(ErrorCode::OutOfRange, field);
  }
  return value;
}

// Child element text, or attribute of the same name.
std::optional<std::string> component(const pt::ptree& node, const std::string& name) {
  if (auto child = node.get_child_optional(name)) return child->data();
  if (auto attr = node.get_optional<std::string>("<xmlattr>." + name)) return *attr;
  return std::nullopt;
}

double scalar_field(const pt::ptree& parent, const std::string& name,
                    const std::string& path) {
  auto node = parent.get_child_optional(name);
  if (!node) fail(ErrorCode::MissingField, path);
  return parse_number(node->data(), path);
}

Eigen::Vector2d vector_field(const pt::ptree& parent, const std::string& name,
                             const std::string& path) {
  auto node = parent.get_child_optional(name);
  if (!node) fail(ErrorCode::MissingField, path);
  auto x = component(*node, "x");
  auto y = component(*node, "y");
  if (!x) fail(ErrorCode::MissingField, path + ".x");
  if (!y) fail(ErrorCode::MissingField, path + ".y");
  return {parse_number(*x, path + ".x"), parse_number(*y, path + ".y")};
}

LensType parse_lens_type(const pt::ptree& node, int fallback_id) {
  LensType lt;
  if (auto id = node.get_optional<std::string>("<xmlattr>.id")) {
    lt.id = static_cast<int>(parse_number(*id, "lens_type.id"));
  } else if (auto id_elem = node.get_child_optional("id")) {
    lt.id = static_cast<int>(parse_number(id_elem->data(), "lens_type.id"));
  } else {
    lt.id = fallback_id;
  }
  lt.offset = vector_field(node, "offset", "lens_type.offset");
  auto range = node.get_child_optional("depth_range");
  if (!range) fail(ErrorCode::MissingField, "lens_type.depth_range");
  auto lo = component(*range, "min");
  auto hi = component(*range, "max");
  if (!lo) fail(ErrorCode::MissingField, "lens_type.depth_range.min");
  if (!hi) fail(ErrorCode::MissingField, "lens_type.depth_range.max");
  lt.depth_min = parse_number(*lo, "lens_type.depth_range.min");
  lt.depth_max = parse_number(*hi, "lens_type.depth_range.max");
  return lt;
}

const pt::ptree& document_root(const pt::ptree& doc) {
  const pt::ptree* root = nullptr;
  for (const auto& [key, child] : doc) {
    if (is_meta(key) || key == "<xmldecl>") continue;
    if (root) fail(ErrorCode::MalformedXml, "document has more than one root element");
    root = &child;
  }
  if (!root) fail(ErrorCode::MalformedXml, "document has no root element");
  return *root;
}

}  // namespace

const LensType& MlaCalibration::lens_type(int id) const {
  for (const auto& lt : lens_types) {
    if (lt.id == id) return lt;
  }
  fail(ErrorCode::UnknownLensType, "unknown lens type " + std::to_string(id));
}

MlaParseResult parse_mla_xml(std::string_view bytes) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(bytes)};
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    fail(ErrorCode::MalformedXml, e.what());
  }
  const pt::ptree& root = document_root(doc);

  MlaParseResult result;
  auto& cal = result.calibration;
  for (const auto& [key, child] : root) {
    if (!is_meta(key) && !kKnownElements.count(key)) {
      result.warnings.push_back("ignored element <" + key + ">");
    }
  }

  cal.offset = vector_field(root, "offset", "offset");
  cal.diameter = scalar_field(root, "diameter", "diameter");
  cal.rotation = scalar_field(root, "rotation", "rotation");
  cal.lens_border = scalar_field(root, "lens_border", "lens_border");
  cal.tcp = scalar_field(root, "tcp", "tcp");
  cal.lens_base_x = vector_field(root, "lens_base_x", "lens_base_x");
  cal.lens_base_y = vector_field(root, "lens_base_y", "lens_base_y");
  cal.sub_grid_base = vector_field(root, "sub_grid_base", "sub_grid_base");

  std::vector<LensType> types;
  for (const auto& [key, child] : root) {
    if (key == "lens_type") {
      types.push_back(parse_lens_type(child, static_cast<int>(types.size()) + 1));
    }
  }
  if (types.empty()) fail(ErrorCode::MissingField, "lens_type");
  if (types.size() != 3) fail(ErrorCode::OutOfRange, "lens_type");

  std::set<int> ids;
  for (const auto& lt : types) ids.insert(lt.id);
  if (ids == std::set<int>{0, 1, 2}) {
    for (auto& lt : types) ++lt.id;
    result.warnings.push_back("lens_type ids 0..2 renumbered to 1..3");
    ids = {1, 2, 3};
  }
  if (ids != std::set<int>{1, 2, 3}) fail(ErrorCode::OutOfRange, "lens_type.id");
  std::sort(types.begin(), types.end(),
            [](const LensType& a, const LensType& b) { return a.id < b.id; });
  std::copy(types.begin(), types.end(), cal.lens_types.begin());

  if (!(cal.diameter > 0.0)) fail(ErrorCode::OutOfRange, "diameter");
  if (!(cal.lens_border >= 0.0)) fail(ErrorCode::OutOfRange, "lens_border");
  if (!(cal.tcp > 1.0)) fail(ErrorCode::OutOfRange, "tcp");
  if (!cal.lens_types[0].offset.isZero(0.0)) fail(ErrorCode::OutOfRange, "lens_type.offset");
  for (const auto& lt : cal.lens_types) {
    if (!(lt.depth_min < lt.depth_max)) fail(ErrorCode::OutOfRange, "lens_type.depth_range");
  }
  return result;
}

std::string serialize_mla_xml(const MlaCalibration& cal) {
  std::ostringstream out;
  auto scalar = [&](const char* indent, const char* name, double v) {
    out << indent << '<' << name << '>' << format_double(v) << "</" << name << ">\n";
  };
  auto vec = [&](const char* indent, const char* name, const Eigen::Vector2d& v) {
    out << indent << '<' << name << ">\n";
    const std::string inner = std::string(indent) + "  ";
    scalar(inner.c_str(), "x", v.x());
    scalar(inner.c_str(), "y", v.y());
    out << indent << "</" << name << ">\n";
  };
  out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
  out << "<RayCalibData>\n";
  vec("  ", "offset", cal.offset);
  scalar("  ", "diameter", cal.diameter);
  scalar("  ", "rotation", cal.rotation);
  scalar("  ", "lens_border", cal.lens_border);
  scalar("  ", "tcp", cal.tcp);
  vec("  ", "lens_base_x", cal.lens_base_x);
  vec("  ", "lens_base_y", cal.lens_base_y);
  vec("  ", "sub_grid_base", cal.sub_grid_base);
  for (const auto& lt : cal.lens_types) {
    out << "  <lens_type id=\"" << lt.id << "\">\n";
    vec("    ", "offset", lt.offset);
    out << "    <depth_range>\n";
    scalar("      ", "min", lt.depth_min);
    scalar("      ", "max", lt.depth_max);
    out << "    </depth_range>\n";
    out << "  </lens_type>\n";
  }
  out << "</RayCalibData>\n";
  return out.str();
}

json mla_to_json(const MlaCalibration& cal) {
  auto v2 = [](const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); };
  json types = json::array();
  for (const auto& lt : cal.lens_types) {
    types.push_back({{"id", lt.id},
                     {"offset", v2(lt.offset)},
                     {"depth_range", json::array({lt.depth_min, lt.depth_max})}});
  }
  return json{{"offset", v2(cal.offset)},
              {"diameter", cal.diameter},
              {"rotation", cal.rotation},
              {"lens_border", cal.lens_border},
              {"tcp", cal.tcp},
              {"lens_base_x", v2(cal.lens_base_x)},
              {"lens_base_y", v2(cal.lens_base_y)},
              {"sub_grid_base", v2(cal.sub_grid_base)},
              {"lens_types", types}};
}

Eigen::Vector2d lens_center_mla(const MlaCalibration& cal, int type_id, int i, int j) {
  const LensType& lt = cal.lens_type(type_id);
  const Eigen::Vector2d grid = i * cal.lens_base_x + j * cal.lens_base_y + lt.offset;
  const double c = std::cos(cal.rotation);
  const double s = std::sin(cal.rotation);
  const Eigen::Vector2d rotated(c * grid.x() - s * grid.y(), s * grid.x() + c * grid.y());
  return cal.offset + cal.diameter * rotated;
}

PixelPoint lens_center(const MlaCalibration& cal, int type_id, int i, int j,
                       ImageSize image) {
  const Eigen::Vector2d m = lens_center_mla(cal, type_id, i, j);
  return {0.5 * image.width + m.x(), 0.5 * image.height - m.y()};
}

std::vector<int> lens_types_for_depth(const MlaCalibration& cal, double v) {
  std::vector<int> ids;
  for (const auto& lt : cal.lens_types) {
    if (v >= lt.depth_min && v <= lt.depth_max) ids.push_back(lt.id);
  }
  return ids;
}

}  // namespace plenreg
